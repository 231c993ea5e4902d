// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "cli.hpp"

int main(int argc, char** argv) { return catequiv::cli::run(argc, argv); }

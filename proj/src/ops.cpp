// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace catequiv::core::ops {
namespace {

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

std::size_t wrap(long index, std::size_t period) {
  const long p = static_cast<long>(period);
  long r = index % p;
  if (r < 0) r += p;
  return static_cast<std::size_t>(r);
}

struct ConvGeometry {
  std::size_t c_in, length, c_out, c_in_group, c_out_group, taps, dilation,
      half, padded;
};

ConvGeometry conv_geometry(const Shape& xs, const Shape& ws,
                           const Conv1dOptions& opt) {
  if (xs.size() != 2) {
    throw ShapeError("conv1d: input must be [C_in x T], got " + to_string(xs));
  }
  if (ws.size() != 3) {
    throw ShapeError("conv1d: weight must be [C_out x C_in/groups x K], got " +
                     to_string(ws));
  }
  ConvGeometry g{};
  g.c_in = xs[0];
  g.length = xs[1];
  g.c_out = ws[0];
  g.c_in_group = ws[1];
  g.taps = ws[2];
  g.dilation = opt.dilation;
  if (opt.groups == 0 || g.c_in % opt.groups != 0 ||
      g.c_out % opt.groups != 0) {
    throw ShapeError("conv1d: channels " + std::to_string(g.c_in) + "->" +
                     std::to_string(g.c_out) + " not divisible by groups " +
                     std::to_string(opt.groups));
  }
  if (g.c_in / opt.groups != g.c_in_group) {
    throw ShapeError("conv1d: weight expects " + std::to_string(g.c_in_group) +
                     " input channels per group, input provides " +
                     std::to_string(g.c_in / opt.groups));
  }
  if (g.taps % 2 == 0) {
    throw ShapeError("conv1d: kernel length must be odd, got " +
                     std::to_string(g.taps));
  }
  if (g.dilation == 0 || g.dilation * (g.taps - 1) >= g.length) {
    throw ShapeError("conv1d: dilated extent " +
                     std::to_string(g.dilation * (g.taps - 1)) +
                     " must be below T=" + std::to_string(g.length));
  }
  g.c_out_group = g.c_out / opt.groups;
  g.half = (g.taps - 1) / 2 * g.dilation;
  g.padded = g.length + 2 * g.half;
  return g;
}

std::vector<double> pad_time(const Tensor& x, const ConvGeometry& g,
                             Padding padding) {
  std::vector<double> xp(g.c_in * g.padded, 0.0);
  for (std::size_t i = 0; i < g.c_in; ++i) {
    const double* src = x.data().data() + i * g.length;
    double* dst = xp.data() + i * g.padded;
    if (padding == Padding::kCircular) {
      for (std::size_t j = 0; j < g.padded; ++j) {
        dst[j] = src[wrap(static_cast<long>(j) - static_cast<long>(g.half),
                          g.length)];
      }
    } else {
      std::copy(src, src + g.length, dst + g.half);
    }
  }
  return xp;
}

// Views shape as [outer, n, inner] around `axis`.
struct AxisView {
  std::size_t outer = 1, n = 1, inner = 1;
  Shape reduced;
};

AxisView axis_view(const Shape& s, std::size_t axis, const char* op) {
  if (axis >= s.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for " + to_string(s));
  }
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= s[i];
  v.n = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) v.inner *= s[i];
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != axis) v.reduced.push_back(s[i]);
  }
  if (v.reduced.empty()) v.reduced.push_back(1);
  return v;
}

}  // namespace

Tensor shift_time(const Tensor& x, long tau) {
  if (x.rank() == 0) throw ShapeError("shift_time: scalar input");
  const std::size_t length = x.shape().back();
  const std::size_t rows = length ? x.size() / length : 0;
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < length; ++t) {
      out[r * length + t] =
          x[r * length + wrap(static_cast<long>(t) - tau, length)];
    }
  }
  return out;
}

Var conv1d(Var x, Var w, const Conv1dOptions& opt) {
  const ConvGeometry g = conv_geometry(x.shape(), w.shape(), opt);
  const std::vector<double> xp = pad_time(x.value(), g, opt.padding);
  const double* wd = w.value().data().data();
  Tensor y({g.c_out, g.length}, 0.0);
  for (std::size_t o = 0; o < g.c_out; ++o) {
    const std::size_t grp = o / g.c_out_group;
    double* yo = y.data().data() + o * g.length;
    for (std::size_t ii = 0; ii < g.c_in_group; ++ii) {
      const double* xi = xp.data() + (grp * g.c_in_group + ii) * g.padded;
      for (std::size_t k = 0; k < g.taps; ++k) {
        const double wv = wd[(o * g.c_in_group + ii) * g.taps + k];
        const double* src = xi + k * g.dilation;
        for (std::size_t t = 0; t < g.length; ++t) yo[t] += wv * src[t];
      }
    }
  }
  const std::size_t xid = x.id(), wid = w.id();
  const Padding padding = opt.padding;
  return x.tape()->push(
      std::move(y), {x, w}, [g, xid, wid, padding](Tape& tape, const Tensor& gy) {
        const Tensor& xv = tape.value(xid);
        const Tensor& wv_t = tape.value(wid);
        const double* dy = gy.data().data();
        if (tape.requires_grad(wid)) {
          const std::vector<double> xp = pad_time(xv, g, padding);
          double* dw = tape.grad_buffer(wid).data().data();
          for (std::size_t o = 0; o < g.c_out; ++o) {
            const std::size_t grp = o / g.c_out_group;
            const double* dyo = dy + o * g.length;
            for (std::size_t ii = 0; ii < g.c_in_group; ++ii) {
              const double* xi = xp.data() + (grp * g.c_in_group + ii) * g.padded;
              for (std::size_t k = 0; k < g.taps; ++k) {
                const double* src = xi + k * g.dilation;
                double acc = 0.0;
                for (std::size_t t = 0; t < g.length; ++t) acc += dyo[t] * src[t];
                dw[(o * g.c_in_group + ii) * g.taps + k] += acc;
              }
            }
          }
        }
        if (tape.requires_grad(xid)) {
          std::vector<double> dxp(g.c_in * g.padded, 0.0);
          const double* wd = wv_t.data().data();
          for (std::size_t o = 0; o < g.c_out; ++o) {
            const std::size_t grp = o / g.c_out_group;
            const double* dyo = dy + o * g.length;
            for (std::size_t ii = 0; ii < g.c_in_group; ++ii) {
              double* di = dxp.data() + (grp * g.c_in_group + ii) * g.padded;
              for (std::size_t k = 0; k < g.taps; ++k) {
                const double wk = wd[(o * g.c_in_group + ii) * g.taps + k];
                double* dst = di + k * g.dilation;
                for (std::size_t t = 0; t < g.length; ++t) dst[t] += wk * dyo[t];
              }
            }
          }
          double* dx = tape.grad_buffer(xid).data().data();
          for (std::size_t i = 0; i < g.c_in; ++i) {
            const double* di = dxp.data() + i * g.padded;
            double* dxi = dx + i * g.length;
            for (std::size_t j = 0; j < g.padded; ++j) {
              const long t = static_cast<long>(j) - static_cast<long>(g.half);
              if (padding == Padding::kCircular) {
                dxi[wrap(t, g.length)] += di[j];
              } else if (t >= 0 && t < static_cast<long>(g.length)) {
                dxi[t] += di[j];
              }
            }
          }
        }
      });
}

Tensor conv1d_reference(const Tensor& x, const Tensor& w,
                        const Conv1dOptions& opt) {
  const ConvGeometry g = conv_geometry(x.shape(), w.shape(), opt);
  Tensor y({g.c_out, g.length}, 0.0);
  const long centre = static_cast<long>((g.taps - 1) / 2);
  for (std::size_t o = 0; o < g.c_out; ++o) {
    const std::size_t grp = o / g.c_out_group;
    for (std::size_t t = 0; t < g.length; ++t) {
      double acc = 0.0;
      for (std::size_t ii = 0; ii < g.c_in_group; ++ii) {
        const std::size_t i = grp * g.c_in_group + ii;
        for (std::size_t k = 0; k < g.taps; ++k) {
          const long src = static_cast<long>(t) +
                           (static_cast<long>(k) - centre) *
                               static_cast<long>(g.dilation);
          double xv = 0.0;
          if (opt.padding == Padding::kCircular) {
            xv = x.at(i, wrap(src, g.length));
          } else if (src >= 0 && src < static_cast<long>(g.length)) {
            xv = x.at(i, static_cast<std::size_t>(src));
          }
          acc += w[(o * g.c_in_group + ii) * g.taps + k] * xv;
        }
      }
      y.at(o, t) = acc;
    }
  }
  return y;
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
  const std::size_t aid = a.id(), bid = b.id();
  return a.tape()->push(std::move(y), {a, b},
                        [aid, bid](Tape& tape, const Tensor& gy) {
                          for (std::size_t id : {aid, bid}) {
                            if (!tape.requires_grad(id)) continue;
                            Tensor& g = tape.grad_buffer(id);
                            for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
                          }
                        });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b.value()[i];
  const std::size_t aid = a.id(), bid = b.id();
  return a.tape()->push(std::move(y), {a, b},
                        [aid, bid](Tape& tape, const Tensor& gy) {
                          if (tape.requires_grad(aid)) {
                            Tensor& g = tape.grad_buffer(aid);
                            for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
                          }
                          if (tape.requires_grad(bid)) {
                            Tensor& g = tape.grad_buffer(bid);
                            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gy[i];
                          }
                        });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
  const std::size_t aid = a.id(), bid = b.id();
  return a.tape()->push(std::move(y), {a, b},
                        [aid, bid](Tape& tape, const Tensor& gy) {
                          const Tensor& av = tape.value(aid);
                          const Tensor& bv = tape.value(bid);
                          if (tape.requires_grad(aid)) {
                            Tensor& g = tape.grad_buffer(aid);
                            for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * bv[i];
                          }
                          if (tape.requires_grad(bid)) {
                            Tensor& g = tape.grad_buffer(bid);
                            for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * av[i];
                          }
                        });
}

Var scale(Var a, double factor) {
  Tensor y = a.value();
  for (double& v : y.data()) v *= factor;
  const std::size_t aid = a.id();
  return a.tape()->push(std::move(y), {a},
                        [aid, factor](Tape& tape, const Tensor& gy) {
                          Tensor& g = tape.grad_buffer(aid);
                          for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * gy[i];
                        });
}

Var relu(Var a) {
  Tensor y = a.value();
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  const std::size_t aid = a.id();
  return a.tape()->push(std::move(y), {a}, [aid](Tape& tape, const Tensor& gy) {
    const Tensor& av = tape.value(aid);
    Tensor& g = tape.grad_buffer(aid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (av[i] > 0.0) g[i] += gy[i];
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t aid = a.id();
  return a.tape()->push(Tensor({1}, s), {a}, [aid](Tape& tape, const Tensor& gy) {
    Tensor& g = tape.grad_buffer(aid);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[0];
  });
}

Var reshape(Var a, Shape shape) {
  Tensor y = a.value().reshaped(std::move(shape));
  const std::size_t aid = a.id();
  return a.tape()->push(std::move(y), {a}, [aid](Tape& tape, const Tensor& gy) {
    Tensor& g = tape.grad_buffer(aid);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
  });
}

Var tile(Var a, std::size_t copies) {
  if (a.value().rank() == 0 || copies == 0) {
    throw ShapeError("tile: need rank >= 1 and copies >= 1");
  }
  const Tensor& av = a.value();
  Shape shape = av.shape();
  shape[0] *= copies;
  std::vector<double> data;
  data.reserve(av.size() * copies);
  for (std::size_t c = 0; c < copies; ++c) {
    data.insert(data.end(), av.values().begin(), av.values().end());
  }
  const std::size_t aid = a.id();
  return a.tape()->push(Tensor(std::move(shape), std::move(data)), {a},
                        [aid, copies](Tape& tape, const Tensor& gy) {
                          Tensor& g = tape.grad_buffer(aid);
                          const std::size_t n = g.size();
                          for (std::size_t c = 0; c < copies; ++c) {
                            for (std::size_t i = 0; i < n; ++i) g[i] += gy[c * n + i];
                          }
                        });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  Tensor y = a.value().rows(begin, end);
  const std::size_t aid = a.id();
  const std::size_t cols = a.value().dim(1);
  return a.tape()->push(std::move(y), {a},
                        [aid, begin, cols](Tape& tape, const Tensor& gy) {
                          Tensor& g = tape.grad_buffer(aid);
                          for (std::size_t i = 0; i < gy.size(); ++i) {
                            g[begin * cols + i] += gy[i];
                          }
                        });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat: no parts");
  const Shape& first = parts.front().shape();
  if (first.empty()) throw ShapeError("concat: scalar parts");
  Shape tail(first.begin() + 1, first.end());
  std::size_t rows = 0;
  std::vector<double> data;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // (id, offset)
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size() || !std::equal(tail.begin(), tail.end(), s.begin() + 1)) {
      throw ShapeError("concat: trailing extents differ: " + to_string(first) +
                       " vs " + to_string(s));
    }
    spans.emplace_back(p.id(), data.size());
    rows += s[0];
    data.insert(data.end(), p.value().values().begin(), p.value().values().end());
  }
  Shape shape{rows};
  shape.insert(shape.end(), tail.begin(), tail.end());
  return parts.front().tape()->push(
      Tensor(std::move(shape), std::move(data)), parts,
      [spans](Tape& tape, const Tensor& gy) {
        for (const auto& [id, offset] : spans) {
          if (!tape.requires_grad(id)) continue;
          Tensor& g = tape.grad_buffer(id);
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[offset + i];
        }
      });
}

Var add_channel_bias(Var x, Var b) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2 || b.value().rank() != 1 || b.value().size() != xv.dim(0)) {
    throw ShapeError("add_channel_bias: x " + to_string(xv.shape()) + ", b " +
                     to_string(b.shape()));
  }
  const std::size_t channels = xv.dim(0), length = xv.dim(1);
  Tensor y = xv;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t t = 0; t < length; ++t) y[c * length + t] += b.value()[c];
  }
  const std::size_t xid = x.id(), bid = b.id();
  return x.tape()->push(std::move(y), {x, b},
                        [xid, bid, channels, length](Tape& tape, const Tensor& gy) {
                          if (tape.requires_grad(xid)) {
                            Tensor& g = tape.grad_buffer(xid);
                            for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
                          }
                          if (tape.requires_grad(bid)) {
                            Tensor& g = tape.grad_buffer(bid);
                            for (std::size_t c = 0; c < channels; ++c) {
                              double acc = 0.0;
                              for (std::size_t t = 0; t < length; ++t) acc += gy[c * length + t];
                              g[c] += acc;
                            }
                          }
                        });
}

Var l2_norm(Var x, std::size_t axis) {
  const AxisView v = axis_view(x.shape(), axis, "l2_norm");
  const Tensor& xv = x.value();
  Tensor y(v.reduced, 0.0);
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t j = 0; j < v.inner; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < v.n; ++a) {
        const double e = xv[(o * v.n + a) * v.inner + j];
        acc += e * e;
      }
      y[o * v.inner + j] = std::sqrt(acc);
    }
  }
  const std::size_t xid = x.id();
  Tensor norms = y;
  return x.tape()->push(std::move(y), {x},
                        [xid, v, norms = std::move(norms)](Tape& tape, const Tensor& gy) {
                          const Tensor& xv = tape.value(xid);
                          Tensor& g = tape.grad_buffer(xid);
                          for (std::size_t o = 0; o < v.outer; ++o) {
                            for (std::size_t j = 0; j < v.inner; ++j) {
                              const double nrm = norms[o * v.inner + j];
                              if (nrm == 0.0) continue;
                              const double s = gy[o * v.inner + j] / nrm;
                              for (std::size_t a = 0; a < v.n; ++a) {
                                const std::size_t idx = (o * v.n + a) * v.inner + j;
                                g[idx] += s * xv[idx];
                              }
                            }
                          }
                        });
}

Var mean(Var x, std::size_t axis) {
  const AxisView v = axis_view(x.shape(), axis, "mean");
  if (v.n == 0) throw ShapeError("mean: empty axis");
  const Tensor& xv = x.value();
  Tensor y(v.reduced, 0.0);
  const double inv = 1.0 / static_cast<double>(v.n);
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t a = 0; a < v.n; ++a) {
      const double* row = xv.data().data() + (o * v.n + a) * v.inner;
      double* out = y.data().data() + o * v.inner;
      for (std::size_t j = 0; j < v.inner; ++j) out[j] += row[j];
    }
  }
  for (double& e : y.data()) e *= inv;
  const std::size_t xid = x.id();
  return x.tape()->push(std::move(y), {x}, [xid, v, inv](Tape& tape, const Tensor& gy) {
    Tensor& g = tape.grad_buffer(xid);
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t a = 0; a < v.n; ++a) {
        for (std::size_t j = 0; j < v.inner; ++j) {
          g[(o * v.n + a) * v.inner + j] += inv * gy[o * v.inner + j];
        }
      }
    }
  });
}

Var gap_time(Var x) {
  if (x.shape().empty()) throw ShapeError("gap_time: scalar input");
  return mean(x, x.shape().size() - 1);
}

Var affine(Var weight, Var z, Var bias) {
  const Tensor& wv = weight.value();
  const Tensor& zv = z.value();
  const Tensor& bv = bias.value();
  if (wv.rank() != 2 || zv.rank() != 1 || bv.rank() != 1 ||
      wv.dim(1) != zv.size() || wv.dim(0) != bv.size()) {
    throw ShapeError("affine: W " + to_string(wv.shape()) + ", z " +
                     to_string(zv.shape()) + ", b " + to_string(bv.shape()));
  }
  const std::size_t rows = wv.dim(0), cols = wv.dim(1);
  Tensor y = bv;
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wv[r * cols + c] * zv[c];
    y[r] += acc;
  }
  const std::size_t wid = weight.id(), zid = z.id(), bid = bias.id();
  return weight.tape()->push(
      std::move(y), {weight, z, bias},
      [wid, zid, bid, rows, cols](Tape& tape, const Tensor& gy) {
        const Tensor& wv = tape.value(wid);
        const Tensor& zv = tape.value(zid);
        if (tape.requires_grad(wid)) {
          Tensor& g = tape.grad_buffer(wid);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += gy[r] * zv[c];
          }
        }
        if (tape.requires_grad(zid)) {
          Tensor& g = tape.grad_buffer(zid);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) g[c] += gy[r] * wv[r * cols + c];
          }
        }
        if (tape.requires_grad(bid)) {
          Tensor& g = tape.grad_buffer(bid);
          for (std::size_t r = 0; r < rows; ++r) g[r] += gy[r];
        }
      });
}

Var dropout(Var x, double p, bool train, Rng* rng) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must lie in [0, 1)");
  if (!train || p == 0.0) return x;
  if (!rng) throw std::invalid_argument("dropout: train mode needs an Rng");
  const double keep = 1.0 - p;
  Tensor mask(x.shape(), 0.0);
  for (double& m : mask.data()) m = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
  Tensor y = x.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
  const std::size_t xid = x.id();
  return x.tape()->push(std::move(y), {x},
                        [xid, mask = std::move(mask)](Tape& tape, const Tensor& gy) {
                          Tensor& g = tape.grad_buffer(xid);
                          for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * mask[i];
                        });
}

Var group_norm(Var x, std::size_t groups, Var gamma, Var beta, double eps) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2) throw ShapeError("group_norm: input must be [C x T]");
  const std::size_t channels = xv.dim(0), length = xv.dim(1);
  if (groups == 0 || channels % groups != 0) {
    throw ShapeError("group_norm: " + std::to_string(channels) +
                     " channels not divisible into " + std::to_string(groups) +
                     " groups");
  }
  if (gamma.value().size() != channels || beta.value().size() != channels) {
    throw ShapeError("group_norm: affine parameters must have " +
                     std::to_string(channels) + " entries");
  }
  const std::size_t per_group = channels / groups;
  const std::size_t count = per_group * length;
  Tensor normalized(xv.shape());
  std::vector<double> inv_std(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const double* base = xv.data().data() + g * count;
    double mu = 0.0;
    for (std::size_t i = 0; i < count; ++i) mu += base[i];
    mu /= static_cast<double>(count);
    double var = 0.0;
    for (std::size_t i = 0; i < count; ++i) var += (base[i] - mu) * (base[i] - mu);
    var /= static_cast<double>(count);
    inv_std[g] = 1.0 / std::sqrt(var + eps);
    for (std::size_t i = 0; i < count; ++i) {
      normalized[g * count + i] = (base[i] - mu) * inv_std[g];
    }
  }
  Tensor y(xv.shape());
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t t = 0; t < length; ++t) {
      y[c * length + t] =
          normalized[c * length + t] * gamma.value()[c] + beta.value()[c];
    }
  }
  const std::size_t xid = x.id(), gid = gamma.id(), bid = beta.id();
  return x.tape()->push(
      std::move(y), {x, gamma, beta},
      [xid, gid, bid, groups, channels, length, count, inv_std,
       normalized = std::move(normalized)](Tape& tape, const Tensor& gy) {
        const Tensor& gam = tape.value(gid);
        if (tape.requires_grad(gid)) {
          Tensor& g = tape.grad_buffer(gid);
          for (std::size_t c = 0; c < channels; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < length; ++t) {
              acc += gy[c * length + t] * normalized[c * length + t];
            }
            g[c] += acc;
          }
        }
        if (tape.requires_grad(bid)) {
          Tensor& g = tape.grad_buffer(bid);
          for (std::size_t c = 0; c < channels; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < length; ++t) acc += gy[c * length + t];
            g[c] += acc;
          }
        }
        if (tape.requires_grad(xid)) {
          Tensor& g = tape.grad_buffer(xid);
          const std::size_t per_group = channels / groups;
          std::vector<double> dxhat(count);
          for (std::size_t grp = 0; grp < groups; ++grp) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
              const std::size_t idx = grp * count + i;
              const std::size_t c = grp * per_group + i / length;
              dxhat[i] = gy[idx] * gam[c];
              mean_d += dxhat[i];
              mean_dx += dxhat[i] * normalized[idx];
            }
            mean_d /= static_cast<double>(count);
            mean_dx /= static_cast<double>(count);
            for (std::size_t i = 0; i < count; ++i) {
              const std::size_t idx = grp * count + i;
              g[idx] += inv_std[grp] * (dxhat[i] - mean_d - normalized[idx] * mean_dx);
            }
          }
        }
      });
}

Var weighted_cross_entropy(Var logits, std::size_t label, double weight) {
  const Tensor& z = logits.value();
  if (z.rank() != 1 || label >= z.size()) {
    throw ShapeError("weighted_cross_entropy: logits " + to_string(z.shape()) +
                     ", label " + std::to_string(label));
  }
  const double zmax = *std::max_element(z.data().begin(), z.data().end());
  double denom = 0.0;
  for (double v : z.data()) denom += std::exp(v - zmax);
  const double lse = zmax + std::log(denom);
  Tensor probs(z.shape());
  for (std::size_t k = 0; k < z.size(); ++k) probs[k] = std::exp(z[k] - lse);
  const double loss = weight * (lse - z[label]);
  const std::size_t zid = logits.id();
  return logits.tape()->push(
      Tensor({1}, loss), {logits},
      [zid, label, weight, probs = std::move(probs)](Tape& tape, const Tensor& gy) {
        Tensor& g = tape.grad_buffer(zid);
        for (std::size_t k = 0; k < g.size(); ++k) {
          g[k] += gy[0] * weight * (probs[k] - (k == label ? 1.0 : 0.0));
        }
      });
}

}  // namespace catequiv::core::ops

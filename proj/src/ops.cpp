/* Copyright 2026 The SResNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "sresnet/ops.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gemm.hpp"
#include "sresnet/error.hpp"

namespace sresnet {

using detail::grad_sink;
using detail::Trans;

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (!t.defined() || t.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
                         (t.defined() ? shape_str(t.shape()) : std::string("<undefined>")));
  }
}

struct ConvGeometry {
  std::size_t n, cin, h, w, cout, kh, kw, stride, pad, ho, wo;
  std::size_t patch() const { return cin * kh * kw; }
  std::size_t pixels() const { return ho * wo; }
};

// cols[(ci*kh + i)*kw + j][oy*wo + ox] = x[ci][oy*stride - pad + i][ox*stride - pad + j]
void im2col(const ConvGeometry& g, const double* x, double* cols) {
  const std::size_t p = g.pixels();
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        double* row = cols + ((ci * g.kh + i) * g.kw + j) * p;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.h) &&
                                ix < static_cast<std::ptrdiff_t>(g.w);
            row[oy * g.wo + ox] = inside ? x[(ci * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::size_t>(ix)] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const double* cols, double* dx) {
  const std::size_t p = g.pixels();
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        const double* row = cols + ((ci * g.kh + i) * g.kw + j) * p;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
            dx[(ci * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::size_t>(ix)] += row[oy * g.wo + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, std::size_t stride, std::size_t padding) {
  return conv2d(input, weight, Tensor{}, stride, padding);
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
  require_rank(input, 4, "conv2d", "input");
  require_rank(weight, 4, "conv2d", "weight");
  if (stride == 0) throw ConfigError("conv2d: stride must be positive");
  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), input.dim(3), weight.dim(0), weight.dim(2),
                 weight.dim(3), stride, padding, 0, 0};
  if (weight.dim(1) != g.cin) {
    throw DimensionError("conv2d: input channels (axis 1 of input) = " + std::to_string(g.cin) +
                         " but weight in-channels (axis 1 of weight) = " + std::to_string(weight.dim(1)));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != g.cout)) {
    throw DimensionError("conv2d: bias shape " + shape_str(bias.shape()) + " does not match out-channels " +
                         std::to_string(g.cout));
  }
  const std::size_t span_h = g.h + 2 * padding;
  const std::size_t span_w = g.w + 2 * padding;
  if (span_h < g.kh || span_w < g.kw) {
    throw DimensionError("conv2d: kernel " + std::to_string(g.kh) + "x" + std::to_string(g.kw) +
                         " exceeds padded input " + std::to_string(span_h) + "x" + std::to_string(span_w) +
                         " (axes 2,3)");
  }
  g.ho = (span_h - g.kh) / stride + 1;
  g.wo = (span_w - g.kw) / stride + 1;

  Tensor out(Shape{g.n, g.cout, g.ho, g.wo});
  const std::size_t k = g.patch();
  const std::size_t p = g.pixels();
  std::vector<double> cols(k * p);
  const double* x = input.data().data();
  const double* wt = weight.data().data();
  double* y = out.data().data();
  for (std::size_t n = 0; n < g.n; ++n) {
    im2col(g, x + n * g.cin * g.h * g.w, cols.data());
    double* yn = y + n * g.cout * p;
    detail::gemm(Trans::No, Trans::No, g.cout, p, k, wt, cols.data(), yn, false);
    if (bias.defined()) {
      for (std::size_t co = 0; co < g.cout; ++co) {
        const double b = bias[co];
        for (std::size_t q = 0; q < p; ++q) yn[co * p + q] += b;
      }
    }
  }

  detail::record(out, {&input, &weight, &bias},
                 [g, xi = input.impl(), wi = weight.impl(), bi = bias.impl()](std::span<const double> gy) {
                   const std::size_t k = g.patch();
                   const std::size_t p = g.pixels();
                   double* dx = grad_sink(xi);
                   double* dw = grad_sink(wi);
                   double* db = bi ? grad_sink(bi) : nullptr;
                   std::vector<double> cols(k * p);
                   for (std::size_t n = 0; n < g.n; ++n) {
                     const double* gyn = gy.data() + n * g.cout * p;
                     if (dw) {
                       im2col(g, xi->data.data() + n * g.cin * g.h * g.w, cols.data());
                       detail::gemm(Trans::No, Trans::Yes, g.cout, k, p, gyn, cols.data(), dw, true);
                     }
                     if (dx) {
                       detail::gemm(Trans::Yes, Trans::No, k, p, g.cout, wi->data.data(), gyn, cols.data(), false);
                       col2im_add(g, cols.data(), dx + n * g.cin * g.h * g.w);
                     }
                     if (db) {
                       for (std::size_t co = 0; co < g.cout; ++co) {
                         double s = 0.0;
                         for (std::size_t q = 0; q < p; ++q) s += gyn[co * p + q];
                         db[co] += s;
                       }
                     }
                   }
                 });
  return out;
}

Tensor batch_norm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                    Tensor& running_var, const BatchNormOptions& options) {
  require_rank(input, 4, "batch_norm2d", "input");
  if (!(options.eps > 0.0)) throw ConfigError("batch_norm2d: eps must be > 0");
  const std::size_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
  for (const Tensor* t : std::initializer_list<const Tensor*>{&gamma, &beta, &running_mean, &running_var}) {
    if (!t->defined() || t->rank() != 1 || t->dim(0) != c) {
      throw DimensionError("batch_norm2d: per-channel parameter must be [" + std::to_string(c) + "], got " +
                           (t->defined() ? shape_str(t->shape()) : std::string("<undefined>")));
    }
  }
  const std::size_t count = n * hw;
  if (options.training && count < 2) {
    throw DegenerateBatchError("batch_norm2d: training mode needs at least 2 values per channel, got " +
                               std::to_string(count));
  }

  Tensor out(input.shape());
  std::vector<double> mean(c), inv_std(c);
  const double* x = input.data().data();
  double* y = out.data().data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mu, var;
    if (options.training) {
      double s = 0.0;
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t q = 0; q < hw; ++q) s += x[(b * c + ch) * hw + q];
      mu = s / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t q = 0; q < hw; ++q) {
          const double d = x[(b * c + ch) * hw + q] - mu;
          ss += d * d;
        }
      var = ss / static_cast<double>(count);
      running_mean[ch] = (1.0 - options.momentum) * running_mean[ch] + options.momentum * mu;
      running_var[ch] = (1.0 - options.momentum) * running_var[ch] + options.momentum * var;
    } else {
      mu = running_mean[ch];
      var = running_var[ch];
    }
    mean[ch] = mu;
    inv_std[ch] = 1.0 / std::sqrt(var + options.eps);
    const double gm = gamma[ch], bt = beta[ch];
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t q = 0; q < hw; ++q) {
        const std::size_t idx = (b * c + ch) * hw + q;
        y[idx] = gm * (x[idx] - mu) * inv_std[ch] + bt;
      }
  }

  detail::record(out, {&input, &gamma, &beta},
                 [n, c, hw, training = options.training, mean = std::move(mean), inv_std = std::move(inv_std),
                  xi = input.impl(), gi = gamma.impl(), bi = beta.impl()](std::span<const double> gy) {
                   double* dx = grad_sink(xi);
                   double* dg = grad_sink(gi);
                   double* db = grad_sink(bi);
                   const double* x = xi->data.data();
                   const double m = static_cast<double>(n * hw);
                   for (std::size_t ch = 0; ch < c; ++ch) {
                     double sum_dy = 0.0, sum_dy_xhat = 0.0;
                     for (std::size_t b = 0; b < n; ++b)
                       for (std::size_t q = 0; q < hw; ++q) {
                         const std::size_t idx = (b * c + ch) * hw + q;
                         const double xhat = (x[idx] - mean[ch]) * inv_std[ch];
                         sum_dy += gy[idx];
                         sum_dy_xhat += gy[idx] * xhat;
                       }
                     if (dg) dg[ch] += sum_dy_xhat;
                     if (db) db[ch] += sum_dy;
                     if (!dx) continue;
                     const double gm = gi->data[ch];
                     for (std::size_t b = 0; b < n; ++b)
                       for (std::size_t q = 0; q < hw; ++q) {
                         const std::size_t idx = (b * c + ch) * hw + q;
                         if (training) {
                           const double xhat = (x[idx] - mean[ch]) * inv_std[ch];
                           dx[idx] += gm * inv_std[ch] * (gy[idx] - sum_dy / m - xhat * sum_dy_xhat / m);
                         } else {
                           dx[idx] += gm * inv_std[ch] * gy[idx];
                         }
                       }
                   }
                 });
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out(input.shape());
  auto x = input.data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  detail::record(out, {&input}, [xi = input.impl()](std::span<const double> gy) {
    double* dx = grad_sink(xi);
    for (std::size_t i = 0; i < gy.size(); ++i)
      if (xi->data[i] > 0.0) dx[i] += gy[i];
  });
  return out;
}

Tensor sigmoid(const Tensor& input) {
  Tensor out(input.shape());
  auto x = input.data();
  auto y = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Split by sign so exp never overflows.
    if (x[i] >= 0.0) {
      y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    } else {
      const double e = std::exp(x[i]);
      y[i] = e / (1.0 + e);
    }
  }
  detail::record(out, {&input}, [xi = input.impl(), yv = std::vector<double>(y.begin(), y.end())](
                                    std::span<const double> gy) {
    double* dx = grad_sink(xi);
    for (std::size_t i = 0; i < gy.size(); ++i) dx[i] += gy[i] * yv[i] * (1.0 - yv[i]);
  });
  return out;
}

Tensor max_pool2d(const Tensor& input, std::size_t kernel, std::size_t stride, std::size_t padding) {
  require_rank(input, 4, "max_pool2d", "input");
  if (kernel == 0 || stride == 0) throw ConfigError("max_pool2d: kernel and stride must be positive");
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (kernel > h + 2 * padding || kernel > w + 2 * padding) {
    throw DimensionError("max_pool2d: window " + std::to_string(kernel) + " larger than padded input " +
                         std::to_string(h + 2 * padding) + "x" + std::to_string(w + 2 * padding));
  }
  const std::size_t ho = (h + 2 * padding - kernel) / stride + 1;
  const std::size_t wo = (w + 2 * padding - kernel) / stride + 1;
  Tensor out(Shape{n, c, ho, wo});
  std::vector<std::size_t> argmax(out.numel());
  const double* x = input.data().data();
  double* y = out.data().data();
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const double* xp = x + plane * h * w;
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        bool found = false;
        for (std::size_t i = 0; i < kernel; ++i) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * stride + i) - static_cast<std::ptrdiff_t>(padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t j = 0; j < kernel; ++j) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * stride + j) - static_cast<std::ptrdiff_t>(padding);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            const std::size_t idx = static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix);
            if (!found || xp[idx] > best) {
              best = xp[idx];
              best_idx = idx;
              found = true;
            }
          }
        }
        const std::size_t o = (plane * ho + oy) * wo + ox;
        y[o] = best;
        argmax[o] = plane * h * w + best_idx;
      }
  }
  detail::record(out, {&input}, [xi = input.impl(), argmax = std::move(argmax)](std::span<const double> gy) {
    double* dx = grad_sink(xi);
    for (std::size_t o = 0; o < gy.size(); ++o) dx[argmax[o]] += gy[o];
  });
  return out;
}

Tensor global_avg_pool(const Tensor& input) {
  require_rank(input, 4, "global_avg_pool", "input");
  const std::size_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
  Tensor out(Shape{n, c});
  const double* x = input.data().data();
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    double s = 0.0;
    for (std::size_t q = 0; q < hw; ++q) s += x[plane * hw + q];
    out[plane] = s / static_cast<double>(hw);
  }
  detail::record(out, {&input}, [hw, xi = input.impl()](std::span<const double> gy) {
    double* dx = grad_sink(xi);
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::size_t plane = 0; plane < gy.size(); ++plane) {
      const double g = gy[plane] * inv;
      for (std::size_t q = 0; q < hw; ++q) dx[plane * hw + q] += g;
    }
  });
  return out;
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require_rank(input, 2, "linear", "input");
  require_rank(weight, 2, "linear", "weight");
  const std::size_t n = input.dim(0), din = input.dim(1), dout = weight.dim(0);
  if (weight.dim(1) != din) {
    throw DimensionError("linear: input features (axis 1 of input) = " + std::to_string(din) +
                         " but weight expects " + std::to_string(weight.dim(1)) + " (axis 1 of weight)");
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != dout)) {
    throw DimensionError("linear: bias shape " + shape_str(bias.shape()) + " does not match out-features " +
                         std::to_string(dout));
  }
  Tensor out(Shape{n, dout});
  detail::gemm(Trans::No, Trans::Yes, n, dout, din, input.data().data(), weight.data().data(), out.data().data(),
               false);
  if (bias.defined()) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t o = 0; o < dout; ++o) out[r * dout + o] += bias[o];
  }
  detail::record(out, {&input, &weight, &bias},
                 [n, din, dout, xi = input.impl(), wi = weight.impl(), bi = bias.impl()](std::span<const double> gy) {
                   if (double* dx = grad_sink(xi)) {
                     detail::gemm(Trans::No, Trans::No, n, din, dout, gy.data(), wi->data.data(), dx, true);
                   }
                   if (double* dw = grad_sink(wi)) {
                     detail::gemm(Trans::Yes, Trans::No, dout, din, n, gy.data(), xi->data.data(), dw, true);
                   }
                   if (bi) {
                     if (double* db = grad_sink(bi)) {
                       for (std::size_t r = 0; r < n; ++r)
                         for (std::size_t o = 0; o < dout; ++o) db[o] += gy[r * dout + o];
                     }
                   }
                 });
  return out;
}

Tensor channel_scale(const Tensor& x, const Tensor& w) {
  require_rank(x, 4, "channel_scale", "x");
  require_rank(w, 2, "channel_scale", "w");
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  if (w.dim(0) != n || w.dim(1) != c) {
    throw DimensionError("channel_scale: weights " + shape_str(w.shape()) + " do not match [N,C] of " +
                         shape_str(x.shape()));
  }
  Tensor out(x.shape());
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const double s = w[plane];
    for (std::size_t q = 0; q < hw; ++q) out[plane * hw + q] = x[plane * hw + q] * s;
  }
  detail::record(out, {&x, &w}, [hw, xi = x.impl(), wi = w.impl()](std::span<const double> gy) {
    double* dx = grad_sink(xi);
    double* dw = grad_sink(wi);
    const std::size_t planes = wi->data.size();
    for (std::size_t plane = 0; plane < planes; ++plane) {
      double acc = 0.0;
      for (std::size_t q = 0; q < hw; ++q) {
        const std::size_t idx = plane * hw + q;
        if (dx) dx[idx] += gy[idx] * wi->data[plane];
        acc += gy[idx] * xi->data[idx];
      }
      if (dw) dw[plane] += acc;
    }
  });
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) + " differ");
  }
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
  detail::record(out, {&a, &b}, [ai = a.impl(), bi = b.impl()](std::span<const double> gy) {
    // Same storage twice (x + x) accumulates twice through the same sink.
    for (const auto& impl : {ai, bi}) {
      if (double* d = grad_sink(impl)) {
        for (std::size_t i = 0; i < gy.size(); ++i) d[i] += gy[i];
      }
    }
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("mul: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) + " differ");
  }
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * b[i];
  detail::record(out, {&a, &b}, [ai = a.impl(), bi = b.impl()](std::span<const double> gy) {
    if (double* da = grad_sink(ai)) {
      for (std::size_t i = 0; i < gy.size(); ++i) da[i] += gy[i] * bi->data[i];
    }
    if (double* db = grad_sink(bi)) {
      for (std::size_t i = 0; i < gy.size(); ++i) db[i] += gy[i] * ai->data[i];
    }
  });
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * factor;
  detail::record(out, {&a}, [factor, ai = a.impl()](std::span<const double> gy) {
    double* da = grad_sink(ai);
    for (std::size_t i = 0; i < gy.size(); ++i) da[i] += gy[i] * factor;
  });
  return out;
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  Tensor out = Tensor::scalar(s);
  detail::record(out, {&a}, [ai = a.impl()](std::span<const double> gy) {
    double* da = grad_sink(ai);
    for (std::size_t i = 0; i < ai->data.size(); ++i) da[i] += gy[0];
  });
  return out;
}

}  // namespace sresnet

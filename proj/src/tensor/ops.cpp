#include "tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "common/errors.hpp"

namespace attn {

namespace {

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

void add_into(Tensor& dst, const std::vector<double>& src) {
  auto d = dst.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += static_cast<float>(src[i]);
}

// Decisions for a non-differentiable operator: replayed when a BranchLog is
// replaying, otherwise computed by `decide` and recorded if a log is attached.
template <typename Decide>
std::vector<std::int32_t> branch_decisions(Tape& tape, std::size_t count, Decide decide) {
  BranchLog* log = tape.branches();
  if (log != nullptr && log->replaying()) return log->next(count);
  std::vector<std::int32_t> d(count);
  for (std::size_t i = 0; i < count; ++i) d[i] = decide(i);
  if (log != nullptr) log->push(d);
  return d;
}

}  // namespace

float sigmoid_value(float x) {
  double v = x;
  if (v >= 0.0) return static_cast<float>(1.0 / (1.0 + std::exp(-v)));
  double e = std::exp(v);
  return static_cast<float>(e / (1.0 + e));
}

Var conv2d(Var input, Var kernel, Var bias, int stride, int pad) {
  const Tensor& x = input.value();
  const Tensor& k = kernel.value();
  const Tensor& b = bias.value();
  if (stride < 1 || pad < 0) throw UsageError("conv2d: stride must be >= 1 and pad >= 0");
  if (x.ndim() != 4) throw ShapeError("conv2d: input must be NxHxWxC, got " + shape_str(x.shape()));
  if (k.ndim() != 4) throw ShapeError("conv2d: kernel must be khxkwxCinxCout, got " + shape_str(k.shape()));
  const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  const int KH = k.dim(0), KW = k.dim(1), CO = k.dim(3);
  if (KH % 2 == 0 || KW % 2 == 0) throw UsageError("conv2d: kernel extents must be odd");
  if (k.dim(2) != C) {
    throw ShapeError("conv2d: input has " + std::to_string(C) + " channels, kernel expects " +
                     std::to_string(k.dim(2)));
  }
  if (b.ndim() != 1 || b.dim(0) != CO) throw ShapeError("conv2d: bias must have Cout elements");
  const int OH = (H + 2 * pad - KH) / stride + 1;
  const int OW = (W + 2 * pad - KW) / stride + 1;
  if (H + 2 * pad < KH || W + 2 * pad < KW) throw ShapeError("conv2d: kernel larger than padded input");

  Tensor y({N, OH, OW, CO});
  std::vector<double> acc(idx(CO));
  const float* xp = x.ptr();
  const float* kp = k.ptr();
  for (int n = 0; n < N; ++n) {
    for (int oh = 0; oh < OH; ++oh) {
      for (int ow = 0; ow < OW; ++ow) {
        for (int co = 0; co < CO; ++co) acc[idx(co)] = b[idx(co)];
        for (int ki = 0; ki < KH; ++ki) {
          const int ih = oh * stride - pad + ki;
          if (ih < 0 || ih >= H) continue;
          for (int kj = 0; kj < KW; ++kj) {
            const int iw = ow * stride - pad + kj;
            if (iw < 0 || iw >= W) continue;
            const float* xr = xp + ((idx(n) * idx(H) + idx(ih)) * idx(W) + idx(iw)) * idx(C);
            const float* kr = kp + (idx(ki) * idx(KW) + idx(kj)) * idx(C) * idx(CO);
            for (int ci = 0; ci < C; ++ci) {
              const double a = xr[ci];
              const float* kc = kr + idx(ci) * idx(CO);
              double* ap = acc.data();
              for (int co = 0; co < CO; ++co) ap[co] += a * static_cast<double>(kc[co]);
            }
          }
        }
        float* yr = y.ptr() + ((idx(n) * idx(OH) + idx(oh)) * idx(OW) + idx(ow)) * idx(CO);
        for (int co = 0; co < CO; ++co) yr[co] = static_cast<float>(acc[idx(co)]);
      }
    }
  }

  const int xi = input.id(), ki_id = kernel.id(), bi = bias.id();
  auto backward = [=](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    const float* dyp = dy.ptr();
    if (t.needs_grad(bi)) {
      std::vector<double> db(idx(CO), 0.0);
      const std::size_t pixels = idx(N) * idx(OH) * idx(OW);
      for (std::size_t p = 0; p < pixels; ++p) {
        for (int co = 0; co < CO; ++co) db[idx(co)] += dyp[p * idx(CO) + idx(co)];
      }
      add_into(t.grad(bi), db);
    }
    const Tensor& xv = t.value(xi);
    const Tensor& kv = t.value(ki_id);
    if (t.needs_grad(ki_id)) {
      std::vector<double> dk(kv.size(), 0.0);
      for (int n = 0; n < N; ++n) {
        for (int oh = 0; oh < OH; ++oh) {
          for (int ow = 0; ow < OW; ++ow) {
            const float* dyr = dyp + ((idx(n) * idx(OH) + idx(oh)) * idx(OW) + idx(ow)) * idx(CO);
            for (int ki = 0; ki < KH; ++ki) {
              const int ih = oh * stride - pad + ki;
              if (ih < 0 || ih >= H) continue;
              for (int kj = 0; kj < KW; ++kj) {
                const int iw = ow * stride - pad + kj;
                if (iw < 0 || iw >= W) continue;
                const float* xr = xv.ptr() + ((idx(n) * idx(H) + idx(ih)) * idx(W) + idx(iw)) * idx(C);
                double* dkr = dk.data() + (idx(ki) * idx(KW) + idx(kj)) * idx(C) * idx(CO);
                for (int ci = 0; ci < C; ++ci) {
                  const double a = xr[ci];
                  if (a == 0.0) continue;
                  double* dkc = dkr + idx(ci) * idx(CO);
                  for (int co = 0; co < CO; ++co) dkc[co] += a * static_cast<double>(dyr[co]);
                }
              }
            }
          }
        }
      }
      add_into(t.grad(ki_id), dk);
    }
    if (t.needs_grad(xi)) {
      // kernel transposed to kh x kw x Cout x Cin so the inner loop runs over Cin
      std::vector<float> kt(kv.size());
      for (int a = 0; a < KH * KW; ++a) {
        for (int ci = 0; ci < C; ++ci) {
          for (int co = 0; co < CO; ++co) {
            kt[(idx(a) * idx(CO) + idx(co)) * idx(C) + idx(ci)] =
                kv[(idx(a) * idx(C) + idx(ci)) * idx(CO) + idx(co)];
          }
        }
      }
      Tensor& dx = t.grad(xi);
      std::vector<double> dxs(idx(H) * idx(W) * idx(C));
      for (int n = 0; n < N; ++n) {
        std::fill(dxs.begin(), dxs.end(), 0.0);
        for (int oh = 0; oh < OH; ++oh) {
          for (int ow = 0; ow < OW; ++ow) {
            const float* dyr = dyp + ((idx(n) * idx(OH) + idx(oh)) * idx(OW) + idx(ow)) * idx(CO);
            for (int ki = 0; ki < KH; ++ki) {
              const int ih = oh * stride - pad + ki;
              if (ih < 0 || ih >= H) continue;
              for (int kj = 0; kj < KW; ++kj) {
                const int iw = ow * stride - pad + kj;
                if (iw < 0 || iw >= W) continue;
                double* dxr = dxs.data() + (idx(ih) * idx(W) + idx(iw)) * idx(C);
                const float* ktr = kt.data() + (idx(ki) * idx(KW) + idx(kj)) * idx(CO) * idx(C);
                for (int co = 0; co < CO; ++co) {
                  const double g = dyr[co];
                  if (g == 0.0) continue;
                  const float* kc = ktr + idx(co) * idx(C);
                  for (int ci = 0; ci < C; ++ci) dxr[ci] += g * static_cast<double>(kc[ci]);
                }
              }
            }
          }
        }
        float* dst = dx.ptr() + idx(n) * dxs.size();
        for (std::size_t i = 0; i < dxs.size(); ++i) dst[i] += static_cast<float>(dxs[i]);
      }
    }
  };
  return input.tape().record(std::move(y), {input, kernel, bias}, backward);
}

Var maxpool2d(Var input, int k) {
  const Tensor& x = input.value();
  if (k < 1) throw UsageError("maxpool2d: window must be >= 1");
  if (x.ndim() != 4) throw ShapeError("maxpool2d: input must be NxHxWxC, got " + shape_str(x.shape()));
  const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  if (H % k != 0 || W % k != 0) {
    throw ShapeError("maxpool2d: " + shape_str(x.shape()) + " not divisible by window " + std::to_string(k));
  }
  const int OH = H / k, OW = W / k;
  const std::size_t count = idx(N) * idx(OH) * idx(OW) * idx(C);
  auto argmax = branch_decisions(input.tape(), count, [&](std::size_t o) {
    const std::size_t c = o % idx(C);
    std::size_t r = o / idx(C);
    const std::size_t ow = r % idx(OW);
    r /= idx(OW);
    const std::size_t oh = r % idx(OH);
    const std::size_t n = r / idx(OH);
    std::int32_t best = -1;
    float best_v = 0.0f;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const std::size_t at = ((n * idx(H) + oh * idx(k) + idx(i)) * idx(W) + ow * idx(k) + idx(j)) * idx(C) + c;
        if (best < 0 || x[at] > best_v) {
          best = static_cast<std::int32_t>(at);
          best_v = x[at];
        }
      }
    }
    return best;
  });
  Tensor y({N, OH, OW, C});
  for (std::size_t o = 0; o < count; ++o) y[o] = x[idx(argmax[o])];
  const int xi = input.id();
  return input.tape().record(std::move(y), {input}, [xi, argmax = std::move(argmax)](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    Tensor& dx = t.grad(xi);
    for (std::size_t o = 0; o < argmax.size(); ++o) dx[idx(argmax[o])] += dy[o];
  });
}

Var dense(Var input, Var weights, Var bias) {
  const Tensor& x = input.value();
  const Tensor& w = weights.value();
  const Tensor& b = bias.value();
  if (w.ndim() != 2) throw ShapeError("dense: weights must be m x n, got " + shape_str(w.shape()));
  const int M = w.dim(0), Nout = w.dim(1);
  int rows = 1;
  if (x.ndim() == 1 && x.dim(0) == M) {
    rows = 1;
  } else if (x.ndim() == 2 && x.dim(1) == M) {
    rows = x.dim(0);
  } else {
    throw ShapeError("dense: input " + shape_str(x.shape()) + " does not match weights " + shape_str(w.shape()));
  }
  if (b.ndim() != 1 || b.dim(0) != Nout) {
    throw ShapeError("dense: bias " + shape_str(b.shape()) + " does not match " + std::to_string(Nout) + " outputs");
  }
  Tensor y(x.ndim() == 1 ? Shape{Nout} : Shape{rows, Nout});
  std::vector<double> acc(idx(Nout));
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < Nout; ++j) acc[idx(j)] = b[idx(j)];
    const float* xr = x.ptr() + idx(r) * idx(M);
    for (int i = 0; i < M; ++i) {
      const double a = xr[i];
      const float* wr = w.ptr() + idx(i) * idx(Nout);
      double* ap = acc.data();
      for (int j = 0; j < Nout; ++j) ap[j] += a * static_cast<double>(wr[j]);
    }
    for (int j = 0; j < Nout; ++j) y[idx(r) * idx(Nout) + idx(j)] = static_cast<float>(acc[idx(j)]);
  }
  const int xi = input.id(), wi = weights.id(), bi = bias.id();
  return input.tape().record(std::move(y), {input, weights, bias}, [=](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    if (t.needs_grad(bi)) {
      std::vector<double> db(idx(Nout), 0.0);
      for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < Nout; ++j) db[idx(j)] += dy[idx(r) * idx(Nout) + idx(j)];
      }
      add_into(t.grad(bi), db);
    }
    const Tensor& xv = t.value(xi);
    const Tensor& wv = t.value(wi);
    if (t.needs_grad(wi)) {
      std::vector<double> dw(wv.size(), 0.0);
      for (int r = 0; r < rows; ++r) {
        const float* dyr = dy.ptr() + idx(r) * idx(Nout);
        for (int i = 0; i < M; ++i) {
          const double a = xv[idx(r) * idx(M) + idx(i)];
          double* dwr = dw.data() + idx(i) * idx(Nout);
          for (int j = 0; j < Nout; ++j) dwr[j] += a * static_cast<double>(dyr[j]);
        }
      }
      add_into(t.grad(wi), dw);
    }
    if (t.needs_grad(xi)) {
      Tensor& dx = t.grad(xi);
      for (int r = 0; r < rows; ++r) {
        const float* dyr = dy.ptr() + idx(r) * idx(Nout);
        for (int i = 0; i < M; ++i) {
          const float* wr = wv.ptr() + idx(i) * idx(Nout);
          double s = 0.0;
          for (int j = 0; j < Nout; ++j) s += static_cast<double>(wr[j]) * static_cast<double>(dyr[j]);
          dx[idx(r) * idx(M) + idx(i)] += static_cast<float>(s);
        }
      }
    }
  });
}

Var activation(Var input, Activation kind) {
  const Tensor& x = input.value();
  const int xi = input.id();
  Tensor y(x.shape());
  if (kind == Activation::Relu) {
    auto active = branch_decisions(input.tape(), x.size(), [&](std::size_t i) { return x[i] > 0.0f ? 1 : 0; });
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = active[i] ? x[i] : 0.0f;
    return input.tape().record(std::move(y), {input}, [xi, active = std::move(active)](Tape& t, int yi) {
      const Tensor& dy = t.grad(yi);
      Tensor& dx = t.grad(xi);
      for (std::size_t i = 0; i < active.size(); ++i) {
        if (active[i]) dx[i] += dy[i];
      }
    });
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid_value(x[i]);
  return input.tape().record(std::move(y), {input}, [xi](Tape& t, int yi) {
    const Tensor& yv = t.value(yi);
    const Tensor& dy = t.grad(yi);
    Tensor& dx = t.grad(xi);
    for (std::size_t i = 0; i < yv.size(); ++i) {
      const double s = yv[i];
      dx[i] += static_cast<float>(static_cast<double>(dy[i]) * s * (1.0 - s));
    }
  });
}

Var softmax(Var logits) {
  const Tensor& x = logits.value();
  if (x.ndim() == 0) throw ShapeError("softmax: needs at least one dimension");
  const std::size_t K = idx(x.dim(x.ndim() - 1));
  if (K == 0) throw ShapeError("softmax: empty last dimension");
  const std::size_t rows = x.size() / K;
  Tensor y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const float* xr = x.ptr() + r * K;
    const double mx = *std::max_element(xr, xr + K);
    double z = 0.0;
    std::vector<double> e(K);
    for (std::size_t j = 0; j < K; ++j) {
      e[j] = std::exp(static_cast<double>(xr[j]) - mx);
      z += e[j];
    }
    for (std::size_t j = 0; j < K; ++j) y[r * K + j] = static_cast<float>(e[j] / z);
  }
  const int xi = logits.id();
  return logits.tape().record(std::move(y), {logits}, [xi, K, rows](Tape& t, int yi) {
    const Tensor& yv = t.value(yi);
    const Tensor& dy = t.grad(yi);
    Tensor& dx = t.grad(xi);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < K; ++j) dot += static_cast<double>(dy[r * K + j]) * yv[r * K + j];
      for (std::size_t j = 0; j < K; ++j) {
        dx[r * K + j] += static_cast<float>(yv[r * K + j] * (static_cast<double>(dy[r * K + j]) - dot));
      }
    }
  });
}

Var elemwise_mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  std::size_t channels = 1;
  if (av.shape() == bv.shape()) {
    channels = 1;
  } else {
    Shape base = av.shape();
    if (base.empty()) throw ShapeError("elemwise_mul: cannot broadcast against a scalar");
    base.pop_back();
    Shape with_unit = base;
    with_unit.push_back(1);
    if (bv.shape() != base && bv.shape() != with_unit) {
      throw ShapeError("elemwise_mul: " + shape_str(bv.shape()) + " does not broadcast over " + shape_str(av.shape()));
    }
    channels = idx(av.dim(av.ndim() - 1));
  }
  Tensor y(av.shape());
  const std::size_t pixels = bv.size();
  for (std::size_t p = 0; p < pixels; ++p) {
    const float m = bv[p];
    for (std::size_t c = 0; c < channels; ++c) y[p * channels + c] = av[p * channels + c] * m;
  }
  const int ai = a.id(), bi = b.id();
  return a.tape().record(std::move(y), {a, b}, [=](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    const Tensor& avv = t.value(ai);
    const Tensor& bvv = t.value(bi);
    if (t.needs_grad(ai)) {
      Tensor& da = t.grad(ai);
      for (std::size_t p = 0; p < pixels; ++p) {
        for (std::size_t c = 0; c < channels; ++c) da[p * channels + c] += dy[p * channels + c] * bvv[p];
      }
    }
    if (t.needs_grad(bi)) {
      Tensor& db = t.grad(bi);
      for (std::size_t p = 0; p < pixels; ++p) {
        double s = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          s += static_cast<double>(dy[p * channels + c]) * static_cast<double>(avv[p * channels + c]);
        }
        db[p] += static_cast<float>(s);
      }
    }
  });
}

Var reduce_mean(Var t) {
  const Tensor& x = t.value();
  double s = 0.0;
  for (float v : x.data()) s += v;
  const std::size_t n = x.size();
  const int xi = t.id();
  return t.tape().record(Tensor::scalar(static_cast<float>(s / static_cast<double>(n))), {t},
                         [xi, n](Tape& tp, int yi) {
                           const double g = tp.grad(yi)[0] / static_cast<double>(n);
                           Tensor& dx = tp.grad(xi);
                           for (std::size_t i = 0; i < n; ++i) dx[i] += static_cast<float>(g);
                         });
}

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) {
    throw ShapeError("add: " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
  }
  Tensor y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  const int ai = a.id(), bi = b.id();
  return a.tape().record(std::move(y), {a, b}, [ai, bi](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    for (int target : {ai, bi}) {
      if (!t.needs_grad(target)) continue;
      Tensor& d = t.grad(target);
      for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
    }
  });
}

Var scale(Var a, float factor) {
  const Tensor& av = a.value();
  Tensor y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * factor;
  const int ai = a.id();
  return a.tape().record(std::move(y), {a}, [ai, factor](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    Tensor& d = t.grad(ai);
    for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i] * factor;
  });
}

Var reshape(Var a, Shape shape) {
  Tensor y = a.value().reshaped(std::move(shape));
  const int ai = a.id();
  return a.tape().record(std::move(y), {a}, [ai](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    Tensor& d = t.grad(ai);
    for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
  });
}

Var global_avg_pool(Var input) {
  const Tensor& x = input.value();
  if (x.ndim() != 4) throw ShapeError("global_avg_pool: input must be NxHxWxC, got " + shape_str(x.shape()));
  const int N = x.dim(0), C = x.dim(3);
  const std::size_t hw = idx(x.dim(1)) * idx(x.dim(2));
  Tensor y({N, C});
  std::vector<double> acc(idx(C));
  for (int n = 0; n < N; ++n) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const float* xr = x.ptr() + idx(n) * hw * idx(C);
    for (std::size_t p = 0; p < hw; ++p) {
      for (int c = 0; c < C; ++c) acc[idx(c)] += xr[p * idx(C) + idx(c)];
    }
    for (int c = 0; c < C; ++c) y[idx(n) * idx(C) + idx(c)] = static_cast<float>(acc[idx(c)] / static_cast<double>(hw));
  }
  const int xi = input.id();
  return input.tape().record(std::move(y), {input}, [xi, N, C, hw](Tape& t, int yi) {
    const Tensor& dy = t.grad(yi);
    Tensor& dx = t.grad(xi);
    for (int n = 0; n < N; ++n) {
      for (std::size_t p = 0; p < hw; ++p) {
        for (int c = 0; c < C; ++c) {
          dx[(idx(n) * hw + p) * idx(C) + idx(c)] +=
              static_cast<float>(static_cast<double>(dy[idx(n) * idx(C) + idx(c)]) / static_cast<double>(hw));
        }
      }
    }
  });
}

}  // namespace attn

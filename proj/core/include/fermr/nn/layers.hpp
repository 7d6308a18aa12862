// Copyright 2026 the fermr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Layer-wise forward/backward building blocks for the residual classifier.
// Templated on the scalar type: training runs in float, gradient checks run
// the same code in double. Reductions are accumulated in a fixed order for a
// given worker count, so identically configured runs are bit-reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fermr/rng.hpp"
#include "fermr/runtime.hpp"
#include "fermr/tensor.hpp"

namespace fermr::nn {

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool frozen = false;

  void resize(std::vector<std::int64_t> shape) {
    value = Tensor<T>(shape);
    grad = Tensor<T>(std::move(shape));
  }
};

/// Named non-trainable state (batch-norm running statistics).
template <typename T>
struct Buffer {
  std::string name;
  Tensor<T> value;
};

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

namespace detail {

template <typename T>
void im2col(const T* x, std::int64_t channels, std::int64_t height, std::int64_t width,
            int kernel, int stride, int pad, std::int64_t out_h, std::int64_t out_w, T* cols) {
  const std::int64_t plane = out_h * out_w;
  for (std::int64_t c = 0; c < channels; ++c) {
    const T* src = x + c * height * width;
    for (int kr = 0; kr < kernel; ++kr) {
      for (int kc = 0; kc < kernel; ++kc) {
        T* dst = cols + ((c * kernel + kr) * kernel + kc) * plane;
        for (std::int64_t oh = 0; oh < out_h; ++oh) {
          const std::int64_t ih = oh * stride - pad + kr;
          if (ih < 0 || ih >= height) {
            std::fill(dst + oh * out_w, dst + (oh + 1) * out_w, T(0));
            continue;
          }
          const T* src_row = src + ih * width;
          T* dst_row = dst + oh * out_w;
          for (std::int64_t ow = 0; ow < out_w; ++ow) {
            const std::int64_t iw = ow * stride - pad + kc;
            dst_row[ow] = (iw >= 0 && iw < width) ? src_row[iw] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_accumulate(const T* cols, std::int64_t channels, std::int64_t height,
                       std::int64_t width, int kernel, int stride, int pad, std::int64_t out_h,
                       std::int64_t out_w, T* x) {
  const std::int64_t plane = out_h * out_w;
  for (std::int64_t c = 0; c < channels; ++c) {
    T* dst = x + c * height * width;
    for (int kr = 0; kr < kernel; ++kr) {
      for (int kc = 0; kc < kernel; ++kc) {
        const T* src = cols + ((c * kernel + kr) * kernel + kc) * plane;
        for (std::int64_t oh = 0; oh < out_h; ++oh) {
          const std::int64_t ih = oh * stride - pad + kr;
          if (ih < 0 || ih >= height) continue;
          T* dst_row = dst + ih * width;
          const T* src_row = src + oh * out_w;
          for (std::int64_t ow = 0; ow < out_w; ++ow) {
            const std::int64_t iw = ow * stride - pad + kc;
            if (iw >= 0 && iw < width) dst_row[iw] += src_row[ow];
          }
        }
      }
    }
  }
}

}  // namespace detail

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride, int pad,
         bool use_bias = false)
      : in_c_(in_channels), out_c_(out_channels), kernel_(kernel), stride_(stride), pad_(pad),
        use_bias_(use_bias) {
    weight_.name = name + ".weight";
    weight_.resize({out_c_, in_c_, kernel_, kernel_});
    if (use_bias_) {
      bias_.name = name + ".bias";
      bias_.resize({out_c_});
    }
  }

  void init(Rng& rng) {
    // He-normal on fan-in, the standard choice for relu stacks.
    const double stddev = std::sqrt(2.0 / (static_cast<double>(in_c_) * kernel_ * kernel_));
    for (std::int64_t i = 0; i < weight_.value.numel(); ++i) {
      weight_.value[i] = static_cast<T>(rng.gaussian(0.0, stddev));
    }
    if (use_bias_) bias_.value.fill(T(0));
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    const std::int64_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
    if (x.dim(1) != in_c_) throw std::invalid_argument(weight_.name + ": channel mismatch");
    const std::int64_t out_h = (h + 2 * pad_ - kernel_) / stride_ + 1;
    const std::int64_t out_w = (w + 2 * pad_ - kernel_) / stride_ + 1;
    if (out_h < 1 || out_w < 1) throw std::invalid_argument(weight_.name + ": input too small");

    Tensor<T> y({n, out_c_, out_h, out_w});
    const std::int64_t ckk = static_cast<std::int64_t>(in_c_) * kernel_ * kernel_;
    const std::int64_t plane = out_h * out_w;
    ConstMatMap<T> wm(weight_.value.data(), out_c_, ckk);

#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::int64_t i = 0; i < n; ++i) {
      std::vector<T> cols(static_cast<std::size_t>(ckk * plane));
      detail::im2col(x.data() + i * in_c_ * h * w, in_c_, h, w, kernel_, stride_, pad_, out_h,
                     out_w, cols.data());
      ConstMatMap<T> cm(cols.data(), ckk, plane);
      MatMap<T> ym(y.data() + i * out_c_ * plane, out_c_, plane);
      ym.noalias() = wm * cm;
      if (use_bias_) {
        for (std::int64_t oc = 0; oc < out_c_; ++oc) ym.row(oc).array() += bias_.value[oc];
      }
    }

    if (training) {
      x_cache_ = x;
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const Tensor<T>& x = x_cache_;
    const std::int64_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::int64_t out_h = dy.dim(2), out_w = dy.dim(3);
    const std::int64_t ckk = static_cast<std::int64_t>(in_c_) * kernel_ * kernel_;
    const std::int64_t plane = out_h * out_w;

    Tensor<T> dx({n, in_c_, h, w});
    ConstMatMap<T> wm(weight_.value.data(), out_c_, ckk);

    // dx: independent per sample.
#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::int64_t i = 0; i < n; ++i) {
      std::vector<T> dcols(static_cast<std::size_t>(ckk * plane));
      ConstMatMap<T> dym(dy.data() + i * out_c_ * plane, out_c_, plane);
      MatMap<T> dcm(dcols.data(), ckk, plane);
      dcm.noalias() = wm.transpose() * dym;
      detail::col2im_accumulate(dcols.data(), in_c_, h, w, kernel_, stride_, pad_, out_h, out_w,
                                dx.data() + i * in_c_ * h * w);
    }

    // dW and db: per-thread partials over a static sample partition, summed
    // in thread order so the reduction order is fixed for a given worker count.
    const int nthreads = workers();
    std::vector<std::vector<T>> dw_part(static_cast<std::size_t>(nthreads));
    std::vector<std::vector<T>> db_part(static_cast<std::size_t>(nthreads));
#pragma omp parallel num_threads(nthreads)
    {
#ifdef _OPENMP
      const int tid = omp_get_thread_num();
#else
      const int tid = 0;
#endif
      auto& dw_local = dw_part[static_cast<std::size_t>(tid)];
      auto& db_local = db_part[static_cast<std::size_t>(tid)];
      dw_local.assign(static_cast<std::size_t>(out_c_ * ckk), T(0));
      if (use_bias_) db_local.assign(static_cast<std::size_t>(out_c_), T(0));
      MatMap<T> dwm(dw_local.data(), out_c_, ckk);
      std::vector<T> cols(static_cast<std::size_t>(ckk * plane));
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < n; ++i) {
        detail::im2col(x.data() + i * in_c_ * h * w, in_c_, h, w, kernel_, stride_, pad_, out_h,
                       out_w, cols.data());
        ConstMatMap<T> cm(cols.data(), ckk, plane);
        ConstMatMap<T> dym(dy.data() + i * out_c_ * plane, out_c_, plane);
        dwm.noalias() += dym * cm.transpose();
        if (use_bias_) {
          for (std::int64_t oc = 0; oc < out_c_; ++oc) db_local[oc] += dym.row(oc).sum();
        }
      }
    }
    for (int t = 0; t < nthreads; ++t) {
      if (dw_part[static_cast<std::size_t>(t)].empty()) continue;
      for (std::int64_t j = 0; j < out_c_ * ckk; ++j) {
        weight_.grad[j] += dw_part[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
      }
      if (use_bias_) {
        for (std::int64_t oc = 0; oc < out_c_; ++oc) {
          bias_.grad[oc] += db_part[static_cast<std::size_t>(t)][static_cast<std::size_t>(oc)];
        }
      }
    }
    return dx;
  }

  void collect(std::vector<Param<T>*>& params) {
    params.push_back(&weight_);
    if (use_bias_) params.push_back(&bias_);
  }

  Param<T>& weight() { return weight_; }
  int out_channels() const { return out_c_; }

 private:
  int in_c_ = 0, out_c_ = 0, kernel_ = 0, stride_ = 1, pad_ = 0;
  bool use_bias_ = false;
  Param<T> weight_;
  Param<T> bias_;
  Tensor<T> x_cache_;
};

template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(std::string name, int channels, double momentum = 0.1, double eps = 1e-5)
      : channels_(channels), momentum_(momentum), eps_(eps) {
    gamma_.name = name + ".weight";
    gamma_.resize({channels_});
    gamma_.value.fill(T(1));
    beta_.name = name + ".bias";
    beta_.resize({channels_});
    running_mean_.name = name + ".running_mean";
    running_mean_.value = Tensor<T>({channels_});
    running_var_.name = name + ".running_var";
    running_var_.value = Tensor<T>({channels_});
    running_var_.value.fill(T(1));
  }

  Tensor<T> forward(const Tensor<T>& x, bool training, bool track_stats = true) {
    const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (c != channels_) throw std::invalid_argument(gamma_.name + ": channel mismatch");
    const std::int64_t plane = h * w;
    const std::int64_t m = n * plane;
    Tensor<T> y(x.shape());

    if (training) {
      xhat_ = Tensor<T>(x.shape());
      invstd_.assign(static_cast<std::size_t>(channels_), T(0));
#pragma omp parallel for schedule(static) num_threads(workers())
      for (std::int64_t ch = 0; ch < channels_; ++ch) {
        T sum = T(0), sq_sum = T(0);
        for (std::int64_t i = 0; i < n; ++i) {
          const T* src = x.data() + (i * c + ch) * plane;
          for (std::int64_t j = 0; j < plane; ++j) {
            sum += src[j];
            sq_sum += src[j] * src[j];
          }
        }
        const T mean = sum / static_cast<T>(m);
        T var = sq_sum / static_cast<T>(m) - mean * mean;
        if (var < T(0)) var = T(0);
        const T invstd = T(1) / std::sqrt(var + static_cast<T>(eps_));
        invstd_[static_cast<std::size_t>(ch)] = invstd;

        const T g = gamma_.value[ch], b = beta_.value[ch];
        for (std::int64_t i = 0; i < n; ++i) {
          const T* src = x.data() + (i * c + ch) * plane;
          T* xh = xhat_.data() + (i * c + ch) * plane;
          T* dst = y.data() + (i * c + ch) * plane;
          for (std::int64_t j = 0; j < plane; ++j) {
            xh[j] = (src[j] - mean) * invstd;
            dst[j] = g * xh[j] + b;
          }
        }
        if (track_stats) {
          // unbiased variance in the running estimate, matching the usual
          // framework convention so converted weights line up
          const T unbiased = m > 1 ? var * static_cast<T>(m) / static_cast<T>(m - 1) : var;
          running_mean_.value[ch] =
              static_cast<T>(1.0 - momentum_) * running_mean_.value[ch] +
              static_cast<T>(momentum_) * mean;
          running_var_.value[ch] = static_cast<T>(1.0 - momentum_) * running_var_.value[ch] +
                                   static_cast<T>(momentum_) * unbiased;
        }
      }
      batch_ = n;
    } else {
#pragma omp parallel for schedule(static) num_threads(workers())
      for (std::int64_t ch = 0; ch < channels_; ++ch) {
        const T mean = running_mean_.value[ch];
        const T invstd = T(1) / std::sqrt(running_var_.value[ch] + static_cast<T>(eps_));
        const T g = gamma_.value[ch], b = beta_.value[ch];
        for (std::int64_t i = 0; i < n; ++i) {
          const T* src = x.data() + (i * c + ch) * plane;
          T* dst = y.data() + (i * c + ch) * plane;
          for (std::int64_t j = 0; j < plane; ++j) {
            dst[j] = g * (src[j] - mean) * invstd + b;
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (xhat_.numel() == 0) throw std::logic_error(gamma_.name + ": backward without forward");
    const std::int64_t n = dy.dim(0), c = dy.dim(1), plane = dy.dim(2) * dy.dim(3);
    const std::int64_t m = n * plane;
    Tensor<T> dx(dy.shape());

#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::int64_t ch = 0; ch < channels_; ++ch) {
      T sum_dy = T(0), sum_dy_xhat = T(0);
      for (std::int64_t i = 0; i < n; ++i) {
        const T* dsrc = dy.data() + (i * c + ch) * plane;
        const T* xh = xhat_.data() + (i * c + ch) * plane;
        for (std::int64_t j = 0; j < plane; ++j) {
          sum_dy += dsrc[j];
          sum_dy_xhat += dsrc[j] * xh[j];
        }
      }
      gamma_.grad[ch] += sum_dy_xhat;
      beta_.grad[ch] += sum_dy;

      const T g_invstd = gamma_.value[ch] * invstd_[static_cast<std::size_t>(ch)];
      const T mean_dy = sum_dy / static_cast<T>(m);
      const T mean_dy_xhat = sum_dy_xhat / static_cast<T>(m);
      for (std::int64_t i = 0; i < n; ++i) {
        const T* dsrc = dy.data() + (i * c + ch) * plane;
        const T* xh = xhat_.data() + (i * c + ch) * plane;
        T* ddst = dx.data() + (i * c + ch) * plane;
        for (std::int64_t j = 0; j < plane; ++j) {
          ddst[j] = g_invstd * (dsrc[j] - mean_dy - xh[j] * mean_dy_xhat);
        }
      }
    }
    return dx;
  }

  void collect(std::vector<Param<T>*>& params) {
    params.push_back(&gamma_);
    params.push_back(&beta_);
  }

  void collect_buffers(std::vector<Buffer<T>*>& buffers) {
    buffers.push_back(&running_mean_);
    buffers.push_back(&running_var_);
  }

 private:
  std::int64_t channels_ = 0;
  double momentum_ = 0.1, eps_ = 1e-5;
  Param<T> gamma_, beta_;
  Buffer<T> running_mean_, running_var_;
  Tensor<T> xhat_;
  std::vector<T> invstd_;
  std::int64_t batch_ = 0;
};

template <typename T>
class ReLU {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool training) {
    Tensor<T> y(x.shape());
    const std::int64_t n = x.numel();
    const T* src = x.data();
    T* dst = y.data();
#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::int64_t i = 0; i < n; ++i) dst[i] = src[i] > T(0) ? src[i] : T(0);
    if (training) y_cache_ = y;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(dy.shape());
    const std::int64_t n = dy.numel();
    const T* y = y_cache_.data();
    const T* src = dy.data();
    T* dst = dx.data();
#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::int64_t i = 0; i < n; ++i) dst[i] = y[i] > T(0) ? src[i] : T(0);
    return dx;
  }

 private:
  Tensor<T> y_cache_;
};

template <typename T>
class MaxPool2d {
 public:
  MaxPool2d(int kernel, int stride, int pad) : kernel_(kernel), stride_(stride), pad_(pad) {}

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::int64_t out_h = (h + 2 * pad_ - kernel_) / stride_ + 1;
    const std::int64_t out_w = (w + 2 * pad_ - kernel_) / stride_ + 1;
    Tensor<T> y({n, c, out_h, out_w});
    if (training) argmax_.assign(static_cast<std::size_t>(y.numel()), 0);
    in_h_ = h;
    in_w_ = w;

#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::int64_t pc = 0; pc < n * c; ++pc) {
      const T* src = x.data() + pc * h * w;
      T* dst = y.data() + pc * out_h * out_w;
      for (std::int64_t oh = 0; oh < out_h; ++oh) {
        for (std::int64_t ow = 0; ow < out_w; ++ow) {
          T best = std::numeric_limits<T>::lowest();
          std::int64_t best_idx = 0;
          for (int kr = 0; kr < kernel_; ++kr) {
            const std::int64_t ih = oh * stride_ - pad_ + kr;
            if (ih < 0 || ih >= h) continue;
            for (int kc = 0; kc < kernel_; ++kc) {
              const std::int64_t iw = ow * stride_ - pad_ + kc;
              if (iw < 0 || iw >= w) continue;
              const T v = src[ih * w + iw];
              if (v > best) {
                best = v;
                best_idx = ih * w + iw;
              }
            }
          }
          dst[oh * out_w + ow] = best;
          if (training) {
            argmax_[static_cast<std::size_t>(pc * out_h * out_w + oh * out_w + ow)] = best_idx;
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const std::int64_t n = dy.dim(0), c = dy.dim(1), out_plane = dy.dim(2) * dy.dim(3);
    Tensor<T> dx({n, c, in_h_, in_w_});
#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::int64_t pc = 0; pc < n * c; ++pc) {
      const T* dsrc = dy.data() + pc * out_plane;
      T* ddst = dx.data() + pc * in_h_ * in_w_;
      for (std::int64_t j = 0; j < out_plane; ++j) {
        ddst[argmax_[static_cast<std::size_t>(pc * out_plane + j)]] += dsrc[j];
      }
    }
    return dx;
  }

 private:
  int kernel_, stride_, pad_;
  std::int64_t in_h_ = 0, in_w_ = 0;
  std::vector<std::int64_t> argmax_;
};

template <typename T>
class GlobalAvgPool {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    const std::int64_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
    in_h_ = x.dim(2);
    in_w_ = x.dim(3);
    Tensor<T> y({n, c});
    for (std::int64_t i = 0; i < n * c; ++i) {
      T sum = T(0);
      const T* src = x.data() + i * plane;
      for (std::int64_t j = 0; j < plane; ++j) sum += src[j];
      y[i] = sum / static_cast<T>(plane);
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const std::int64_t n = dy.dim(0), c = dy.dim(1), plane = in_h_ * in_w_;
    Tensor<T> dx({n, c, in_h_, in_w_});
    for (std::int64_t i = 0; i < n * c; ++i) {
      const T v = dy[i] / static_cast<T>(plane);
      T* dst = dx.data() + i * plane;
      for (std::int64_t j = 0; j < plane; ++j) dst[j] = v;
    }
    return dx;
  }

 private:
  std::int64_t in_h_ = 0, in_w_ = 0;
};

template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in_features, int out_features)
      : in_f_(in_features), out_f_(out_features) {
    weight_.name = name + ".weight";
    weight_.resize({out_f_, in_f_});
    bias_.name = name + ".bias";
    bias_.resize({out_f_});
  }

  void init(Rng& rng) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(in_f_));
    for (std::int64_t i = 0; i < weight_.value.numel(); ++i) {
      weight_.value[i] = static_cast<T>(rng.gaussian(0.0, stddev));
    }
    bias_.value.fill(T(0));
  }

  /// Zero-mean Gaussian with std 0.01 and zero bias (classifier head init).
  void init_head(Rng& rng) {
    for (std::int64_t i = 0; i < weight_.value.numel(); ++i) {
      weight_.value[i] = static_cast<T>(rng.gaussian(0.0, 0.01));
    }
    bias_.value.fill(T(0));
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    const std::int64_t b = x.dim(0);
    Tensor<T> y({b, out_f_});
    ConstMatMap<T> xm(x.data(), b, in_f_);
    ConstMatMap<T> wm(weight_.value.data(), out_f_, in_f_);
    MatMap<T> ym(y.data(), b, out_f_);
    ym.noalias() = xm * wm.transpose();
    for (std::int64_t i = 0; i < b; ++i) {
      for (std::int64_t j = 0; j < out_f_; ++j) y.at(i, j) += bias_.value[j];
    }
    if (training) x_cache_ = x;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const std::int64_t b = dy.dim(0);
    ConstMatMap<T> dym(dy.data(), b, out_f_);
    ConstMatMap<T> xm(x_cache_.data(), b, in_f_);
    ConstMatMap<T> wm(weight_.value.data(), out_f_, in_f_);

    MatMap<T> dwm(weight_.grad.data(), out_f_, in_f_);
    dwm.noalias() += dym.transpose() * xm;
    for (std::int64_t j = 0; j < out_f_; ++j) bias_.grad[j] += dym.col(j).sum();

    Tensor<T> dx({b, in_f_});
    MatMap<T> dxm(dx.data(), b, in_f_);
    dxm.noalias() = dym * wm;
    return dx;
  }

  void collect(std::vector<Param<T>*>& params) {
    params.push_back(&weight_);
    params.push_back(&bias_);
  }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  int in_features() const { return in_f_; }
  int out_features() const { return out_f_; }

 private:
  std::int64_t in_f_ = 0, out_f_ = 0;
  Param<T> weight_, bias_;
  Tensor<T> x_cache_;
};

/// Channel recalibration: global average pool -> bottleneck of width C/r ->
/// sigmoid gate -> channelwise scale. Gates are strictly inside (0,1).
template <typename T>
class SEBlock {
 public:
  SEBlock() = default;
  SEBlock(const std::string& name, int channels, int reduction)
      : channels_(channels),
        mid_(channels % reduction == 0 ? channels / reduction
                                       : std::max(1, channels / reduction)),
        fc1_(name + ".fc1", channels, mid_), fc2_(name + ".fc2", mid_, channels) {}

  void init(Rng& rng) {
    fc1_.init(rng);
    fc2_.init(rng);
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    const std::int64_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);

    Tensor<T> squeezed = gap_.forward(x);
    Tensor<T> hidden = relu_.forward(fc1_.forward(squeezed, training), training);
    Tensor<T> z = fc2_.forward(hidden, training);

    gate_ = Tensor<T>({n, c});
    for (std::int64_t i = 0; i < n * c; ++i) gate_[i] = T(1) / (T(1) + std::exp(-z[i]));

    Tensor<T> y(x.shape());
#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::int64_t i = 0; i < n * c; ++i) {
      const T g = gate_[i];
      const T* src = x.data() + i * plane;
      T* dst = y.data() + i * plane;
      for (std::int64_t j = 0; j < plane; ++j) dst[j] = src[j] * g;
    }
    if (training) x_cache_ = x;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const Tensor<T>& x = x_cache_;
    const std::int64_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);

    Tensor<T> dx(x.shape());
    Tensor<T> dgate({n, c});
#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::int64_t i = 0; i < n * c; ++i) {
      const T g = gate_[i];
      const T* dsrc = dy.data() + i * plane;
      const T* xs = x.data() + i * plane;
      T* ddst = dx.data() + i * plane;
      T acc = T(0);
      for (std::int64_t j = 0; j < plane; ++j) {
        ddst[j] = dsrc[j] * g;
        acc += dsrc[j] * xs[j];
      }
      dgate[i] = acc;
    }

    Tensor<T> dz({n, c});
    for (std::int64_t i = 0; i < n * c; ++i) {
      dz[i] = dgate[i] * gate_[i] * (T(1) - gate_[i]);
    }
    Tensor<T> dsqueezed = fc1_.backward(relu_.backward(fc2_.backward(dz)));
    Tensor<T> dpool = gap_.backward(dsqueezed);
    for (std::int64_t i = 0; i < dx.numel(); ++i) dx[i] += dpool[i];
    return dx;
  }

  const Tensor<T>& last_gate() const { return gate_; }

  void collect(std::vector<Param<T>*>& params) {
    fc1_.collect(params);
    fc2_.collect(params);
  }

  int mid_channels() const { return mid_; }

 private:
  int channels_ = 0, mid_ = 0;
  Linear<T> fc1_, fc2_;
  ReLU<T> relu_;
  GlobalAvgPool<T> gap_;
  Tensor<T> gate_;
  Tensor<T> x_cache_;
};

/// Adam with bias correction. Frozen parameters are skipped.
template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<Param<T>*> params, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto* p : params_) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }

  void step(double learning_rate) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Param<T>& p = *params_[k];
      if (p.frozen) continue;
      for (std::int64_t i = 0; i < p.value.numel(); ++i) {
        const T g = p.grad[i];
        m_[k][i] = static_cast<T>(beta1_) * m_[k][i] + static_cast<T>(1.0 - beta1_) * g;
        v_[k][i] = static_cast<T>(beta2_) * v_[k][i] + static_cast<T>(1.0 - beta2_) * g * g;
        const double m_hat = static_cast<double>(m_[k][i]) / bc1;
        const double v_hat = static_cast<double>(v_[k][i]) / bc2;
        p.value[i] -= static_cast<T>(learning_rate * m_hat / (std::sqrt(v_hat) + eps_));
      }
    }
  }

  std::int64_t steps() const { return t_; }

 private:
  std::vector<Param<T>*> params_;
  std::vector<Tensor<T>> m_, v_;
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

}  // namespace fermr::nn

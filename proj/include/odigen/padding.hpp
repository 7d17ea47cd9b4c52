#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "odigen/rng.hpp"
#include "odigen/tensor.hpp"

namespace odigen::gan {

// Continuity padding ahead of the discriminator: left/right sides receive
// exact copies of the opposite side, and one extra row above and below is
// filled with a single pixel value picked from the original top / bottom
// row at a random column.
struct PadSpec {
  int side_width = 50;
  bool enabled = true;

  static PadSpec for_width(int width, bool enabled = true) {
    // 50 columns at width 512, scaled proportionally elsewhere.
    int sw = static_cast<int>(std::lround(width * 50.0 / 512.0));
    return {sw < 1 ? 1 : sw, enabled};
  }

  void validate(int width) const {
    if (enabled && (side_width <= 0 || side_width >= width / 2))
      throw std::invalid_argument("PadSpec: side_width out of (0, width/2)");
  }
};

// Backward needs the chosen columns to route the constant-row gradients.
struct PadContext {
  int side_width = 0;
  std::vector<int> top_cols, bottom_cols;  // per batch item
  int in_h = 0, in_w = 0;
};

// Draw the top/bottom source columns for a batch. Kept separate so the
// condition and candidate images of one discriminator pair can share the
// same columns and stay spatially registered.
inline std::pair<std::vector<int>, std::vector<int>> sample_pad_columns(int batch, int width,
                                                                        Rng& rng) {
  std::vector<int> top(batch), bottom(batch);
  for (int n = 0; n < batch; ++n) {
    top[n] = uniform_int(rng, 0, width - 1);
    bottom[n] = uniform_int(rng, 0, width - 1);
  }
  return {top, bottom};
}

template <typename T>
std::pair<Tensor4<T>, PadContext> continuity_pad_with(const Tensor4<T>& img,
                                                      const PadSpec& spec,
                                                      const std::vector<int>& top_cols,
                                                      const std::vector<int>& bottom_cols) {
  spec.validate(img.w);
  PadContext ctx;
  ctx.side_width = spec.side_width;
  ctx.in_h = img.h;
  ctx.in_w = img.w;
  const int s = spec.side_width;
  const int ow = img.w + 2 * s;
  const int oh = img.h + 2;
  Tensor4<T> out(img.n, img.c, oh, ow);
  for (int n = 0; n < img.n; ++n) {
    int ct = top_cols.at(n);
    int cb = bottom_cols.at(n);
    ctx.top_cols.push_back(ct);
    ctx.bottom_cols.push_back(cb);
    for (int c = 0; c < img.c; ++c) {
      for (int y = 0; y < img.h; ++y) {
        for (int x = 0; x < s; ++x)
          out.at(n, c, y + 1, x) = img.at(n, c, y, img.w - s + x);
        for (int x = 0; x < img.w; ++x) out.at(n, c, y + 1, s + x) = img.at(n, c, y, x);
        for (int x = 0; x < s; ++x)
          out.at(n, c, y + 1, s + img.w + x) = img.at(n, c, y, x);
      }
      T top_v = img.at(n, c, 0, ct);
      T bot_v = img.at(n, c, img.h - 1, cb);
      for (int x = 0; x < ow; ++x) {
        out.at(n, c, 0, x) = top_v;
        out.at(n, c, oh - 1, x) = bot_v;
      }
    }
  }
  return {std::move(out), std::move(ctx)};
}

template <typename T>
std::pair<Tensor4<T>, PadContext> continuity_pad(const Tensor4<T>& img, const PadSpec& spec,
                                                 Rng& rng) {
  auto [top, bottom] = sample_pad_columns(img.n, img.w, rng);
  return continuity_pad_with(img, spec, top, bottom);
}

template <typename T>
Tensor4<T> continuity_pad_backward(const PadContext& ctx, const Tensor4<T>& grad_padded) {
  const int s = ctx.side_width;
  Tensor4<T> gx(grad_padded.n, grad_padded.c, ctx.in_h, ctx.in_w);
  for (int n = 0; n < gx.n; ++n)
    for (int c = 0; c < gx.c; ++c) {
      for (int y = 0; y < ctx.in_h; ++y) {
        for (int x = 0; x < s; ++x)
          gx.at(n, c, y, ctx.in_w - s + x) += grad_padded.at(n, c, y + 1, x);
        for (int x = 0; x < ctx.in_w; ++x)
          gx.at(n, c, y, x) += grad_padded.at(n, c, y + 1, s + x);
        for (int x = 0; x < s; ++x)
          gx.at(n, c, y, x) += grad_padded.at(n, c, y + 1, s + ctx.in_w + x);
      }
      for (int x = 0; x < grad_padded.w; ++x) {
        gx.at(n, c, 0, ctx.top_cols[n]) += grad_padded.at(n, c, 0, x);
        gx.at(n, c, ctx.in_h - 1, ctx.bottom_cols[n]) +=
            grad_padded.at(n, c, grad_padded.h - 1, x);
      }
    }
  return gx;
}

}  // namespace odigen::gan

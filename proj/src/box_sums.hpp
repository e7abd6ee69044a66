#pragma once

#include <cstdint>
#include <vector>

namespace tentlab {
namespace detail {

// Inclusive d-dimensional prefix sums over a torus lattice with wrapped
// axis-aligned box queries.  A box is centered at a lattice point with a
// per-axis halfwidth m; 2m+1 >= side means the axis is full.
template <typename T>
class TorusPrefix {
 public:
  TorusPrefix(std::vector<int> sides, const std::vector<T>& field) : sides_(std::move(sides)) {
    const int d = static_cast<int>(sides_.size());
    strides_.assign(d, 1);
    for (int a = d - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * sides_[a + 1];
    pre_ = field;
    // Per-axis running sums turn pre_ into inclusive corner sums.
    const int n = static_cast<int>(pre_.size());
    for (int a = 0; a < d; ++a) {
      const int stride = strides_[a];
      const int side = sides_[a];
      for (int base = 0; base < n; ++base) {
        const int coord = (base / stride) % side;
        if (coord > 0) pre_[base] += pre_[base - stride];
      }
    }
  }

  // Sum of the field over the wrapped box [center - m, center + m] per axis.
  T box(const std::vector<int>& center, const std::vector<int>& halfwidth) const {
    const int d = static_cast<int>(sides_.size());
    // Per axis: one or two unwrapped [lo, hi] segments inside [0, side).
    segs_lo_.assign(2 * d, 0);
    segs_hi_.assign(2 * d, 0);
    nseg_.assign(d, 0);
    for (int a = 0; a < d; ++a) {
      const int side = sides_[a];
      const int m = halfwidth[a];
      if (2 * m + 1 >= side) {
        segs_lo_[2 * a] = 0;
        segs_hi_[2 * a] = side - 1;
        nseg_[a] = 1;
        continue;
      }
      int lo = center[a] - m, hi = center[a] + m;
      if (lo < 0) {
        segs_lo_[2 * a] = 0;
        segs_hi_[2 * a] = hi;
        segs_lo_[2 * a + 1] = lo + side;
        segs_hi_[2 * a + 1] = side - 1;
        nseg_[a] = 2;
      } else if (hi >= side) {
        segs_lo_[2 * a] = lo;
        segs_hi_[2 * a] = side - 1;
        segs_lo_[2 * a + 1] = 0;
        segs_hi_[2 * a + 1] = hi - side;
        nseg_[a] = 2;
      } else {
        segs_lo_[2 * a] = lo;
        segs_hi_[2 * a] = hi;
        nseg_[a] = 1;
      }
    }
    choice_.assign(d, 0);
    return sum_segments(0);
  }

 private:
  T sum_segments(int axis) const {
    const int d = static_cast<int>(sides_.size());
    if (axis == d) return rect_sum();
    T total = T(0);
    for (int c = 0; c < nseg_[axis]; ++c) {
      choice_[axis] = c;
      total += sum_segments(axis + 1);
    }
    return total;
  }

  // Alternating corner sum of the rectangle picked by choice_.
  T rect_sum() const {
    const int d = static_cast<int>(sides_.size());
    T total = T(0);
    for (unsigned bits = 0; bits < (1u << d); ++bits) {
      int idx = 0;
      int sign = 1;
      bool zero = false;
      for (int a = 0; a < d; ++a) {
        const int s = 2 * a + choice_[a];
        int coord;
        if (bits & (1u << a)) {
          coord = segs_lo_[s] - 1;
          sign = -sign;
          if (coord < 0) {
            zero = true;
            break;
          }
        } else {
          coord = segs_hi_[s];
        }
        idx += coord * strides_[a];
      }
      if (!zero) total += sign > 0 ? pre_[idx] : -pre_[idx];
    }
    return total;
  }

  std::vector<int> sides_, strides_;
  std::vector<T> pre_;
  mutable std::vector<int> segs_lo_, segs_hi_, nseg_, choice_;
};

// Visits every lattice point of the wrapped box [center - m, center + m],
// calling fn(linear_index).
template <typename Fn>
void for_each_box_point(const std::vector<int>& sides, const std::vector<int>& strides,
                        const std::vector<int>& center, const std::vector<int>& halfwidth,
                        Fn&& fn) {
  const int d = static_cast<int>(sides.size());
  std::vector<int> off(d, 0), lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    if (2 * halfwidth[a] + 1 >= sides[a]) {
      lo[a] = 0;
      hi[a] = sides[a] - 1;
    } else {
      lo[a] = -halfwidth[a];
      hi[a] = halfwidth[a];
    }
    off[a] = lo[a];
  }
  while (true) {
    int idx = 0;
    for (int a = 0; a < d; ++a) {
      int c = (2 * halfwidth[a] + 1 >= sides[a]) ? off[a] : center[a] + off[a];
      c %= sides[a];
      if (c < 0) c += sides[a];
      idx += c * strides[a];
    }
    fn(idx);
    int a = d - 1;
    while (a >= 0) {
      if (++off[a] <= hi[a]) break;
      off[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
}

}  // namespace detail
}  // namespace tentlab

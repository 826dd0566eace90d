#pragma once

// Batched jet propagation through the shared-first-layer network, with a
// hand-written reverse sweep.
//
// For a batch of B points every layer keeps one matrix of shape
// (width x n_channels*B): channel blocks of B contiguous columns holding the
// value, the requested first partials and the requested pure second partials
// of each neuron. Affine maps act on all channels with a single GEMM (the
// bias only touches the value block); tanh is applied with the chain rule
//
//   a      = f(z)
//   a_k    = f'(z) z_k
//   a_kk   = f'(z) z_kk + f''(z) z_k^2
//
// and the reverse sweep applies the adjoint of exactly these formulas. The
// derivatives are exact, as in the generic Jet path.

#include <Eigen/Dense>
#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "mdrf/errors.hpp"
#include "mdrf/network.hpp"

namespace mdrf::ad {

/// Derivatives requested for one field, as bitmasks over input coordinates.
struct ChannelSet {
  bool active = false;
  std::uint32_t first = 0;   // bit k: d/dx_k
  std::uint32_t second = 0;  // bit k: d2/dx_k2 (implies bit k of `first`)

  static ChannelSet none() { return {}; }
  static ChannelSet value_only() { return {true, 0, 0}; }
  static ChannelSet with(std::uint32_t first_mask, std::uint32_t second_mask) {
    return {true, first_mask | second_mask, second_mask};
  }

  ChannelSet& operator|=(const ChannelSet& o) {
    active = active || o.active;
    first |= o.first;
    second |= o.second;
    return *this;
  }
  bool operator==(const ChannelSet&) const = default;
};

/// Position of each derivative channel inside a layer's channel blocks.
class ChannelLayout {
 public:
  static constexpr int kAbsent = -1;

  ChannelLayout() = default;
  ChannelLayout(const ChannelSet& set, std::size_t dim) : set_(set) {
    first_.fill(kAbsent);
    second_.fill(kAbsent);
    if (!set.active) return;
    int c = 1;
    for (std::size_t k = 0; k < dim; ++k)
      if (set.first >> k & 1u) first_[k] = c++;
    for (std::size_t k = 0; k < dim; ++k)
      if (set.second >> k & 1u) second_[k] = c++;
    count_ = c;
  }

  int count() const noexcept { return count_; }
  int first(std::size_t k) const noexcept { return first_[k]; }
  int second(std::size_t k) const noexcept { return second_[k]; }
  const ChannelSet& set() const noexcept { return set_; }

 private:
  ChannelSet set_{};
  std::array<int, 4> first_{kAbsent, kAbsent, kAbsent, kAbsent};
  std::array<int, 4> second_{kAbsent, kAbsent, kAbsent, kAbsent};
  int count_ = 0;
};

class JetEngine {
 public:
  using Mat = Eigen::MatrixXd;
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  JetEngine(const ParamLayout& layout, std::vector<ChannelSet> per_field)
      : layout_(&layout), dim_(layout.spec().input_dim) {
    if (per_field.size() != layout.field_count())
      throw InvalidArgument("JetEngine: one channel set per field is required");
    ChannelSet all;
    for (const auto& s : per_field) all |= s;
    all.active = true;
    shared_ = ChannelLayout(all, dim_);
    fields_.resize(per_field.size());
    for (std::size_t j = 0; j < per_field.size(); ++j) {
      fields_[j].channels = ChannelLayout(per_field[j], dim_);
      fields_[j].layers.resize(layout.subnet(j).size());
    }
  }

  std::size_t batch() const noexcept { return batch_; }
  const ChannelLayout& channels(std::size_t field) const { return fields_.at(field).channels; }

  /// `xi` holds normalized inputs (dim x B). `slope[k]` is d(xi_k)/d(x_k) so
  /// every channel comes out as a derivative in physical coordinates.
  void forward(std::span<const double> theta, const Eigen::Ref<const Mat>& xi,
               std::span<const double> slope) {
    const Eigen::Index B = xi.cols();
    batch_ = static_cast<std::size_t>(B);
    const int nc = shared_.count();

    input_.setZero(static_cast<Eigen::Index>(dim_), nc * B);
    input_.leftCols(B) = xi;
    for (std::size_t k = 0; k < dim_; ++k) {
      if (int c = shared_.first(k); c != ChannelLayout::kAbsent)
        input_.block(static_cast<Eigen::Index>(k), c * B, 1, B).setConstant(slope[k]);
    }
    forward_hidden(theta, layout_->shared(), shared_, input_, shared_layer_);

    for (std::size_t j = 0; j < fields_.size(); ++j) {
      auto& f = fields_[j];
      if (!f.channels.set().active) continue;
      gather(shared_layer_.a, shared_, f.channels, B, f.input);
      const auto& slots = layout_->subnet(j);
      const Mat* in = &f.input;
      for (std::size_t k = 0; k + 1 < slots.size(); ++k) {
        forward_hidden(theta, slots[k], f.channels, *in, f.layers[k]);
        in = &f.layers[k].a;
      }
      const auto& last = slots.back();
      f.out.noalias() = weights(theta, last) * (*in);
      f.out.leftCols(B).array() += theta[last.b_offset];
      f.last_input = in;
    }
  }

  /// Field j's outputs: row vector of channel blocks (1 x n_channels*B).
  const Mat& output(std::size_t field) const { return fields_.at(field).out; }

  double value(std::size_t field, std::size_t point) const {
    return fields_[field].out(0, static_cast<Eigen::Index>(point));
  }
  double channel(std::size_t field, int channel, std::size_t point) const {
    return fields_[field].out(0, channel * static_cast<Eigen::Index>(batch_) + static_cast<Eigen::Index>(point));
  }

  /// Accumulates d(loss)/d(theta) into `grad` given d(loss)/d(output) per
  /// field in the layout of output(). Inactive fields are ignored.
  void backward(std::span<const double> theta, const std::vector<Mat>& out_adjoint, std::span<double> grad) {
    const Eigen::Index B = static_cast<Eigen::Index>(batch_);
    shared_adj_.setZero(shared_layer_.a.rows(), shared_layer_.a.cols());
    for (std::size_t j = 0; j < fields_.size(); ++j) {
      auto& f = fields_[j];
      if (!f.channels.set().active) continue;
      const auto& slots = layout_->subnet(j);
      const auto& last = slots.back();
      const Mat& zbar = out_adjoint.at(j);
      accumulate_affine(grad, last, zbar, *f.last_input, B);
      adj_.noalias() = weights(theta, last).transpose() * zbar;
      for (std::size_t k = slots.size() - 1; k-- > 0;) {
        backward_tanh(f.channels, f.layers[k], adj_, B);
        const Mat& in = k == 0 ? f.input : f.layers[k - 1].a;
        accumulate_affine(grad, slots[k], f.layers[k].zbar, in, B);
        adj_.noalias() = weights(theta, slots[k]).transpose() * f.layers[k].zbar;
      }
      scatter_add(adj_, f.channels, shared_, B, shared_adj_);
    }
    backward_tanh(shared_, shared_layer_, shared_adj_, B);
    accumulate_affine(grad, layout_->shared(), shared_layer_.zbar, input_, B);
  }

 private:
  struct Layer {
    Mat z;      // pre-activation, all channels
    Mat a;      // activation, all channels
    Mat f1;     // f'(z_value)
    Mat f2;     // f''(z_value)
    Mat zbar;   // adjoint of z
  };
  struct Field {
    ChannelLayout channels;
    Mat input;
    std::vector<Layer> layers;
    Mat out;
    const Mat* last_input = nullptr;
  };

  // An owned, aligned copy. Products on a Map straight into theta would let
  // Eigen pick its vectorized summation order from the heap address, and
  // results would differ in the last bit from one process to the next.
  static RowMat weights(std::span<const double> theta, const AffineSlot& s) {
    return Eigen::Map<const RowMat>(theta.data() + s.w_offset, static_cast<Eigen::Index>(s.out),
                                    static_cast<Eigen::Index>(s.in));
  }

  void forward_hidden(std::span<const double> theta, const AffineSlot& slot, const ChannelLayout& ch,
                      const Mat& in, Layer& L) const {
    const Eigen::Index B = static_cast<Eigen::Index>(batch_);
    L.z.noalias() = weights(theta, slot) * in;
    Eigen::Map<const Eigen::VectorXd> bias(theta.data() + slot.b_offset, static_cast<Eigen::Index>(slot.out));
    L.z.leftCols(B).colwise() += bias;
    L.a.resize(L.z.rows(), L.z.cols());
    auto zv = L.z.leftCols(B).array();
    auto av = L.a.leftCols(B).array();
    // tanh through the vectorized exp: tanh|z| = (1 - e) / (1 + e), e = exp(-2|z|)
    const Eigen::ArrayXXd e = (-2.0 * zv.abs()).exp();
    av = (zv < 0.0).select((e - 1.0) / (1.0 + e), (1.0 - e) / (1.0 + e));
    L.f1 = (1.0 - av.square()).matrix();
    L.f2 = (-2.0 * av * L.f1.array()).matrix();
    for (std::size_t k = 0; k < dim_; ++k) {
      const int c = ch.first(k);
      if (c == ChannelLayout::kAbsent) continue;
      L.a.middleCols(c * B, B).array() = L.f1.array() * L.z.middleCols(c * B, B).array();
      if (const int s = ch.second(k); s != ChannelLayout::kAbsent) {
        L.a.middleCols(s * B, B).array() = L.f1.array() * L.z.middleCols(s * B, B).array() +
                                           L.f2.array() * L.z.middleCols(c * B, B).array().square();
      }
    }
  }

  // Adjoint of the tanh jet map. `abar` is overwritten scratch.
  void backward_tanh(const ChannelLayout& ch, Layer& L, const Mat& abar, Eigen::Index B) const {
    L.zbar.resize(abar.rows(), abar.cols());
    auto f1 = L.f1.array();
    auto f2 = L.f2.array();
    auto zval = L.zbar.leftCols(B).array();
    zval = abar.leftCols(B).array() * f1;
    for (std::size_t k = 0; k < dim_; ++k) {
      const int c = ch.first(k);
      if (c == ChannelLayout::kAbsent) continue;
      auto zk = L.z.middleCols(c * B, B).array();
      auto ak_bar = abar.middleCols(c * B, B).array();
      zval += ak_bar * f2 * zk;
      auto zk_bar = L.zbar.middleCols(c * B, B).array();
      zk_bar = ak_bar * f1;
      if (const int s = ch.second(k); s != ChannelLayout::kAbsent) {
        auto akk_bar = abar.middleCols(s * B, B).array();
        auto zkk = L.z.middleCols(s * B, B).array();
        // f''' = -2 f'^2 + 4 a^2 f'
        auto a = L.a.leftCols(B).array();
        zval += akk_bar * (f2 * zkk + (-2.0 * f1.square() + 4.0 * a.square() * f1) * zk.square());
        zk_bar += 2.0 * akk_bar * f2 * zk;
        L.zbar.middleCols(s * B, B).array() = akk_bar * f1;
      }
    }
  }

  static void accumulate_affine(std::span<double> grad, const AffineSlot& s, const Mat& zbar, const Mat& in,
                                Eigen::Index B) {
    Eigen::Map<RowMat> gw(grad.data() + s.w_offset, static_cast<Eigen::Index>(s.out),
                          static_cast<Eigen::Index>(s.in));
    // Reductions go to aligned temporaries first: evaluated straight into
    // `grad`, Eigen would choose the summation order from its address.
    const RowMat prod = zbar * in.transpose();
    gw += prod;
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + s.b_offset, static_cast<Eigen::Index>(s.out));
    const Eigen::VectorXd bsum = zbar.leftCols(B).rowwise().sum();
    gb += bsum;
  }

  // Copies the shared layer's channel blocks needed by one field.
  static void gather(const Mat& src, const ChannelLayout& from, const ChannelLayout& to, Eigen::Index B,
                     Mat& dst) {
    dst.resize(src.rows(), to.count() * B);
    dst.leftCols(B) = src.leftCols(B);
    for (std::size_t k = 0; k < 4; ++k) {
      if (to.first(k) != ChannelLayout::kAbsent)
        dst.middleCols(to.first(k) * B, B) = src.middleCols(from.first(k) * B, B);
      if (to.second(k) != ChannelLayout::kAbsent)
        dst.middleCols(to.second(k) * B, B) = src.middleCols(from.second(k) * B, B);
    }
  }

  static void scatter_add(const Mat& src, const ChannelLayout& from, const ChannelLayout& to, Eigen::Index B,
                          Mat& dst) {
    dst.leftCols(B) += src.leftCols(B);
    for (std::size_t k = 0; k < 4; ++k) {
      if (from.first(k) != ChannelLayout::kAbsent)
        dst.middleCols(to.first(k) * B, B) += src.middleCols(from.first(k) * B, B);
      if (from.second(k) != ChannelLayout::kAbsent)
        dst.middleCols(to.second(k) * B, B) += src.middleCols(from.second(k) * B, B);
    }
  }

  const ParamLayout* layout_;
  std::size_t dim_;
  std::size_t batch_ = 0;
  ChannelLayout shared_;
  Mat input_;
  Layer shared_layer_;
  Mat shared_adj_;
  Mat adj_;
  std::vector<Field> fields_;
};

}  // namespace mdrf::ad

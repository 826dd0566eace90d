#pragma once

// Value and input derivatives of every network output at one point, plus
// the record of which derivatives were actually computed. Residual code reads
// through the checked accessors so a missing derivative is a loud contract
// violation instead of a silent zero.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdrf/autodiff/batched.hpp"
#include "mdrf/autodiff/jet.hpp"
#include "mdrf/errors.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/network.hpp"

namespace mdrf::ad {

template <class T, std::size_t D>
struct FieldJets {
  std::vector<Jet<T, D>> jets;
  std::vector<ChannelSet> available;

  FieldJets() = default;
  explicit FieldJets(std::size_t fields) : jets(fields), available(fields) {}

  std::size_t size() const noexcept { return jets.size(); }

  const T& val(std::size_t f) const {
    if (!available.at(f).active) missing(f, "value");
    return jets[f].v;
  }
  const T& d(std::size_t f, std::size_t k) const {
    if (!(available.at(f).first >> k & 1u)) missing(f, "first derivative " + std::to_string(k));
    return jets[f].d[k];
  }
  const T& dd(std::size_t f, std::size_t k) const {
    if (!(available.at(f).second >> k & 1u)) missing(f, "second derivative " + std::to_string(k));
    return jets[f].dd[k];
  }

 private:
  [[noreturn]] static void missing(std::size_t f, const std::string& what) {
    throw ContractViolation("field jets lack " + what + " of field " + std::to_string(f));
  }
};

/// Input-derivative request, one ChannelSet per field.
using DerivRequest = std::vector<ChannelSet>;

namespace detail {
template <std::size_t D>
FieldJets<double, D> eval_jets(const ModelParams& net, const Point<D>& xi, const std::array<double, D>& slope,
                               const DerivRequest& needed) {
  if (net.spec().input_dim != D) throw InvalidArgument("eval_with_input_derivs: dimension mismatch");
  if (needed.size() != net.layout.field_count())
    throw InvalidArgument("eval_with_input_derivs: one request per field is required");
  for (std::size_t k = 0; k < D; ++k) {
    if (!std::isfinite(xi[k]))
      throw NumericError("eval_with_input_derivs: non-finite input coordinate " + std::to_string(k));
  }
  net.check_finite();
  std::vector<Jet<double, D>> in(D);
  for (std::size_t k = 0; k < D; ++k) in[k] = Jet<double, D>::variable(xi[k], k, slope[k]);
  auto out = forward_generic<Jet<double, D>, double>(net.layout, net.values, in);
  FieldJets<double, D> fj(out.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (!std::isfinite(out[j].v))
      throw NumericError("eval_with_input_derivs: non-finite output for field " + std::to_string(j));
    fj.jets[j] = out[j];
    fj.available[j] = needed[j];
  }
  return fj;
}
}  // namespace detail

/// Value plus requested input derivatives of every field at an already
/// normalized point; derivatives are with respect to the normalized inputs.
template <std::size_t D>
FieldJets<double, D> eval_with_input_derivs(const ModelParams& net, const Point<D>& normalized,
                                            const DerivRequest& needed) {
  std::array<double, D> one;
  one.fill(1.0);
  return detail::eval_jets<D>(net, normalized, one, needed);
}

/// Same at a physical point: the normalizer's affine map is part of the
/// chain, so derivatives come out in physical coordinates.
template <std::size_t D>
FieldJets<double, D> eval_with_input_derivs(const ModelParams& net, const Normalizer<D>& normalizer,
                                            const Point<D>& point, const DerivRequest& needed) {
  for (std::size_t k = 0; k < D; ++k) {
    if (!std::isfinite(point[k]))
      throw NumericError("eval_with_input_derivs: non-finite input coordinate " + std::to_string(k));
  }
  return detail::eval_jets<D>(net, normalizer.normalize(point), normalizer.scale(), needed);
}

/// Loss value and its gradient over every canonical parameter. `loss`
/// receives the parameters as a std::span<const Var> and returns a Var.
template <class F>
GradientResult loss_param_gradient(F&& loss, const ModelParams& params) {
  return gradient_of(std::forward<F>(loss), std::span<const double>(params.values));
}

}  // namespace mdrf::ad

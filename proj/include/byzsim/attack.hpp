// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Byzantine message generation under an omniscient, colluding adversary.
// Attacks act on the round's candidate messages c (differences of the
// error-feedback state), densified.

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "byzsim/core.hpp"
#include "byzsim/data.hpp"
#include "byzsim/error.hpp"

namespace byzsim {

struct AttackSpec {
  enum class Kind { None, SignFlip, LabelFlip, IPM, ALIE };

  Kind kind = Kind::None;
  std::optional<double> z;  // IPM and ALIE strength; unset = default

  static constexpr double kDefaultIpmZ = 0.1;

  void validate() const {
    if (kind == Kind::IPM && z && !(*z > 0.0)) throw ConfigError("IPM strength z must be > 0");
    if (z && !std::isfinite(*z)) throw ConfigError("attack strength must be finite");
  }
};

/// z = Phi^{-1}((G - s) / G), s = floor(n/2) + 1 - B, G = n - B.
inline double alie_default_z(std::size_t n, std::size_t byzantine) {
  const double g = static_cast<double>(n - byzantine);
  const double s = std::floor(static_cast<double>(n) / 2.0) + 1.0 - static_cast<double>(byzantine);
  const double p = (g - s) / g;
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("ALIE default z undefined for n = " + std::to_string(n) +
                      ", B = " + std::to_string(byzantine) + "; set attack_z explicitly");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

struct AttackContext {
  /// Densified messages of the honest workers this round.
  std::vector<Vector> honest_messages;
  /// Per Byzantine slot, the message a protocol-following worker would send.
  std::vector<Vector> reference_messages;
};

/// The B Byzantine messages for this round.
inline std::vector<Vector> byz_messages(const AttackSpec& spec, const AttackContext& ctx,
                                        std::size_t byzantine) {
  spec.validate();
  if (byzantine == 0) return {};
  if (ctx.honest_messages.empty()) throw ProtocolError("attack context has no honest messages");
  if (ctx.reference_messages.size() != byzantine) {
    throw ProtocolError("attack context holds " + std::to_string(ctx.reference_messages.size()) +
                        " reference messages for " + std::to_string(byzantine) + " Byzantine slots");
  }
  const std::size_t d = ctx.honest_messages.front().size();
  for (const auto& m : ctx.honest_messages) require_same_dim(m.size(), d, "attack context");
  const auto g = static_cast<double>(ctx.honest_messages.size());

  switch (spec.kind) {
    case AttackSpec::Kind::None:
    case AttackSpec::Kind::LabelFlip:
      return ctx.reference_messages;
    case AttackSpec::Kind::SignFlip: {
      std::vector<Vector> out;
      out.reserve(byzantine);
      for (const auto& r : ctx.reference_messages) out.push_back(scale(r, -1.0));
      return out;
    }
    case AttackSpec::Kind::IPM: {
      const double z = spec.z.value_or(AttackSpec::kDefaultIpmZ);
      Vector sum(d, 0.0);
      for (const auto& m : ctx.honest_messages) add_into(m, sum);
      return std::vector<Vector>(byzantine, scale(sum, -(z / g)));
    }
    case AttackSpec::Kind::ALIE: {
      const std::size_t n = ctx.honest_messages.size() + byzantine;
      const double z = spec.z ? *spec.z : alie_default_z(n, byzantine);
      const Vector mu = mean_of(ctx.honest_messages);
      Vector out(d);
      for (std::size_t k = 0; k < d; ++k) {
        double ss = 0.0;
        for (const auto& m : ctx.honest_messages) {
          const double diff = m[k] - mu[k];
          ss += diff * diff;
        }
        out[k] = mu[k] - z * std::sqrt(ss / g);
      }
      return std::vector<Vector>(byzantine, out);
    }
  }
  throw ConfigError("unknown attack");
}

/// Label-flipping: every label negated, features untouched.
inline Dataset poison_labels(const Dataset& shard) {
  std::vector<int> labels = shard.labels();
  for (int& b : labels) b = -b;
  return Dataset(shard.dim(), shard.features(), std::move(labels));
}

}  // namespace byzsim

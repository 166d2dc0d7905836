#pragma once

// Finite positive atomic measures on I = [0, 1].

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dgmlab/error.hpp"

namespace dgmlab {

struct Atom {
  double position = 0.0;
  double weight = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

// Canonical form: positions strictly increasing, duplicates merged by
// weight addition, weights below 1e-15 * total mass pruned.
class DiscreteMeasure1D {
 public:
  DiscreteMeasure1D() = default;

  explicit DiscreteMeasure1D(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
      require(std::isfinite(a.position) && std::isfinite(a.weight),
              "DiscreteMeasure1D: non-finite atom");
      if (!(a.position >= 0.0 && a.position <= 1.0))
        throw ValidationError("DiscreteMeasure1D: position " + std::to_string(a.position) + " outside [0,1]");
      require(a.weight >= 0.0, "DiscreteMeasure1D: negative weight");
    }
    std::stable_sort(atoms_.begin(), atoms_.end(),
                     [](const Atom& x, const Atom& y) { return x.position < y.position; });
    std::vector<Atom> merged;
    merged.reserve(atoms_.size());
    for (const auto& a : atoms_) {
      if (!merged.empty() && merged.back().position == a.position)
        merged.back().weight += a.weight;
      else
        merged.push_back(a);
    }
    double mass = 0.0;
    for (const auto& a : merged) mass += a.weight;
    const double floor = 1e-15 * mass;
    std::erase_if(merged, [&](const Atom& a) { return a.weight <= floor; });
    atoms_ = std::move(merged);
  }

  static DiscreteMeasure1D dirac(double position, double weight = 1.0) {
    return DiscreteMeasure1D({{position, weight}});
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  double total_mass() const {
    double mass = 0.0;
    for (const auto& a : atoms_) mass += a.weight;
    return mass;
  }

  DiscreteMeasure1D scaled(double factor) const {
    require(factor >= 0.0 && std::isfinite(factor), "DiscreteMeasure1D::scaled: bad factor");
    auto copy = atoms_;
    for (auto& a : copy) a.weight *= factor;
    return DiscreteMeasure1D(std::move(copy));
  }

  friend bool operator==(const DiscreteMeasure1D&, const DiscreteMeasure1D&) = default;

 private:
  std::vector<Atom> atoms_;
};

}  // namespace dgmlab

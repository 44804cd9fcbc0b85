#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "npmix/errors.hpp"
#include "npmix/normal.hpp"

namespace npmix {

// Location part of a mixture component: either a point x or a normal
// smear N(mu, tau2).  A blob with tau2 == 0 is canonicalized to a point.
struct PointMass {
  double x = 0.0;
};

struct NormalBlob {
  double mu = 0.0;
  double tau2 = 0.0;
};

using Location = std::variant<PointMass, NormalBlob>;

struct Atom {
  Location location;
  double scale = 0.0;   // noise scale s >= 0
  double weight = 0.0;  // p > 0

  bool is_point() const { return std::holds_alternative<PointMass>(location); }
  double loc_value() const {
    return is_point() ? std::get<PointMass>(location).x
                      : std::get<NormalBlob>(location).mu;
  }
  double tau2() const {
    return is_point() ? 0.0 : std::get<NormalBlob>(location).tau2;
  }
  // Variance of the induced normal component (blob smear plus noise).
  double total_var() const { return tau2() + scale * scale; }

  static Atom point(double x, double scale, double weight) {
    return Atom{PointMass{x}, scale, weight};
  }
  static Atom blob(double mu, double tau2, double scale, double weight) {
    return Atom{NormalBlob{mu, tau2}, scale, weight};
  }
};

// Finite discrete mixing distribution over (location, scale) atoms.
// Canonical form: blobs with tau2 == 0 become points, duplicate
// (location, scale) atoms are merged, atoms are sorted.  If `symmetric`
// the atom set must be invariant under negating all locations, with
// matching weights; evaluation routines then sum mirror pairs together
// so symmetry identities hold exactly.
class MixingDistribution {
 public:
  MixingDistribution() = default;
  MixingDistribution(std::vector<Atom> atoms, bool symmetric = false);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool symmetric() const { return symmetric_; }
  std::size_t size() const { return atoms_.size(); }

  static MixingDistribution single_point(double x, double scale) {
    return MixingDistribution({Atom::point(x, scale, 1.0)}, false);
  }

 private:
  std::vector<Atom> atoms_;
  bool symmetric_ = false;
};

// Family restriction: location interval I (extended reals), scale set S.
// S is the interval [scale_lo, scale_hi], or the two-point set
// {scale_lo, scale_hi} when scale_binary is set (used for the S = {0,1}
// special case, which an interval cannot express).
struct SupportSpec {
  double loc_lo = kNegInf;
  double loc_hi = kPosInf;
  double scale_lo = 0.0;
  double scale_hi = 1.0;
  bool scale_binary = false;
  bool symmetric = false;

  void validate() const;
  bool loc_is_real_line() const {
    return loc_lo == kNegInf && loc_hi == kPosInf;
  }
  bool loc_is_neg_halfline() const { return loc_lo == kNegInf && loc_hi == 0.0; }
  bool scale_contains_zero() const { return scale_lo == 0.0; }
  bool contains_location(double x) const { return x >= loc_lo && x <= loc_hi; }

  static SupportSpec real_line(double b = 1.0) {
    return SupportSpec{kNegInf, kPosInf, 0.0, b, false, false};
  }
  static SupportSpec halfline_binary() {
    return SupportSpec{kNegInf, 0.0, 0.0, 1.0, true, false};
  }
  static SupportSpec symmetric_box(double c, double b, double a = 0.0) {
    return SupportSpec{-c, c, a, b, false, true};
  }
};

// Sorted iid observations.
class Sample {
 public:
  Sample() = default;
  explicit Sample(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

 private:
  std::vector<double> values_;
};

// Lebesgue measure plus a finite atom set, against which mixed
// discrete/continuous likelihoods are written.
struct DominatingMeasure {
  std::vector<double> atom_points;  // sorted, distinct
  bool lebesgue = true;

  bool has_atom(double y) const;

  static DominatingMeasure lebesgue_only() { return DominatingMeasure{{}, true}; }
  // Atoms at the observations (optionally also at their mirror images).
  static DominatingMeasure at_observations(const Sample& sample,
                                           bool mirrored = false);
};

// Compensated (Kahan) summation; used wherever weight totals are validated
// or normalized so tolerances do not degrade with the atom count.
double kahan_sum(const std::vector<double>& xs);

}  // namespace npmix

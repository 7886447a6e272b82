#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdl/mpreal.hpp"
#include "qdl/prob.hpp"
#include "qdl/rational.hpp"

namespace qdl {

/// Deterministic 64-bit generator (splitmix-seeded mt19937_64 core with a
/// portable uniform mapping, so seeded runs replay bit-identically).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  /// Uniform in [0,1) with 53 random bits.
  double uniform();
  /// Deterministic substream for trial `index`.
  Rng split(std::uint64_t index) const;

 private:
  std::uint64_t s_[4];
};

struct StateVector {
  std::vector<Rational> amps;

  int dim() const { return static_cast<int>(amps.size()); }
  Rational squared_norm() const;
  static StateVector basis(int dim, int index);
  static StateVector zero(int dim);
  bool operator==(const StateVector&) const = default;
};

/// Square matrix of exact rationals, row-major.
struct RationalMatrix {
  int dim = 0;
  std::vector<Rational> cells;

  static RationalMatrix zero(int dim);
  static RationalMatrix identity(int dim);
  Rational& at(int r, int c) { return cells[static_cast<size_t>(r) * dim + c]; }
  const Rational& at(int r, int c) const { return cells[static_cast<size_t>(r) * dim + c]; }
  RationalMatrix transpose() const;
  RationalMatrix operator*(const RationalMatrix& o) const;
  StateVector apply(const StateVector& v) const;
  bool operator==(const RationalMatrix&) const = default;
};

enum class OutcomeAction : std::uint8_t { kContinue, kRestart, kAccept, kReject };

std::string to_string(OutcomeAction a);

struct OperationElement {
  RationalMatrix matrix;
  OutcomeAction action = OutcomeAction::kContinue;
  std::string label;
};

/// Finite list of operation elements E_i; well-formed when sum E_i^T E_i = I
/// exactly (entries are rationals, so the adjoint is the transpose).
struct Superoperator {
  std::string label;
  std::vector<OperationElement> elements;

  int dim() const { return elements.empty() ? 0 : elements.front().matrix.dim; }
};

/// True iff the completeness equation holds exactly. Throws on
/// dimension mismatch between elements (structural error).
bool check_completeness(const Superoperator& s);

struct ExactBranch {
  int outcome = 0;
  StateVector vec;     // unnormalized E_i |psi~>
  Rational weight;     // <psi~_i | psi~_i>, cumulative path probability
};

/// All outcome branches with unnormalized vectors. Branch weights sum to
/// the squared norm of the input, exactly.
std::vector<ExactBranch> apply_exact(const StateVector& v, const Superoperator& s);

struct SampledOutcome {
  int outcome = 0;
  StateVector vec;
  bool normalized = false;  // true when the norm was an exact rational square
};

/// Samples one outcome with probability w_i / <v|v>. The result is rescaled
/// to unit norm when that can be done in exact rationals; otherwise the
/// unnormalized vector is kept (its norm cancels out of later sampling).
SampledOutcome apply_sampled(const StateVector& v, const Superoperator& s, Rng& rng);

/// Integer bookkeeping for a qubit driven only by ±(unit·√2·π) rotations.
struct RotationTracker {
  long steps = 0;
  Rational unit = Rational(1);

  bool operator==(const RotationTracker&) const = default;
};

RotationTracker rotate(RotationTracker t, int direction, long units);

/// Probability of observing q1: sin²(steps·unit·√2·π). Exactly 0 at steps=0.
MpReal q1_probability(const RotationTracker& t);

}  // namespace qdl

#pragma once

#include "biokinetics/components.hpp"

namespace n2olab::plant {

struct Stream {
  double Q = 0.0;  // m3/d
  bio::Concentrations c{};

  // Mass flow of component i (g/d).
  double load(std::size_t i) const { return Q * c[i]; }
};

// Non-reactive ideal clarifier. A fraction `capture` of every particulate
// mass flow leaves with the underflow; solubles split by flow.
struct ClarifierSpec {
  double capture = 0.998;
};

struct SplitResult {
  Stream overflow;
  Stream underflow;
};

SplitResult settler_split(const Stream& feed, double Q_underflow, const ClarifierSpec& spec);

}  // namespace n2olab::plant

#pragma once

#include <stdexcept>
#include <string>

namespace qtraj {

// Raised when a pairing enumeration or other bounded algorithm is asked for
// more than it supports.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A causal quantity was requested before the history it depends on exists.
class SequencingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Numerical decomposition could not be carried out (non-finite input etc.).
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A ratio or normalization whose denominator is statistically or numerically
// indistinguishable from zero.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qtraj

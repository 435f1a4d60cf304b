#pragma once

#include <stdexcept>
#include <string>

namespace socdispatch {

// Malformed or contract-violating input data (bad files, invalid bids,
// out-of-range arguments). Maps to CLI exit code 2.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An algorithm could not certify its result numerically (singular basis,
// iteration limit, failed post-solve verification). Maps to CLI exit code 3.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An exhaustive search would exceed its configured size cap.
class enumeration_limit_error : public input_error {
 public:
  using input_error::input_error;
};

}  // namespace socdispatch

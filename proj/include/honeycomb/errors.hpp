#pragma once

#include <stdexcept>

namespace honeycomb {

// A request beyond a hard module budget (generator count, cluster size, tree order).
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace honeycomb

#include "gwdual/mapping.hpp"

#include <string>

namespace gwdual {

ReproductionMapping make_mapping(std::span<const std::int64_t> offspring) {
  std::vector<Rank> u;
  u.reserve(offspring.size());
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    if (offspring[i] < 0) {
      throw InvalidOffspring("offspring count at rank " + std::to_string(i + 1) +
                             " is negative: " + std::to_string(offspring[i]));
    }
    u.push_back(static_cast<Rank>(offspring[i]));
  }
  return ReproductionMapping(u);
}

}  // namespace gwdual

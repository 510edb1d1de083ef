#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace homog {

struct SampleRange {
  std::size_t count = 0;
  double radius_min = 0.0;
  double radius_max = 0.0;
  std::uint64_t seed = 0;
};

struct Verdict {
  std::string name;
  std::string condition;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  SampleRange samples;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

nlohmann::ordered_json to_json(const Verdict& v);

}  // namespace homog

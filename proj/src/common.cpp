#include "lowrank/common.hpp"

namespace lowrank {

std::string_view to_string(NormTag tag) {
  return tag == NormTag::frobenius ? "frobenius" : "nuclear";
}

std::string_view to_string(Decision decision) {
  return decision == Decision::reject ? "reject" : "accept";
}

NormTag parse_norm_tag(std::string_view text) {
  if (text == "frobenius") return NormTag::frobenius;
  if (text == "nuclear") return NormTag::nuclear;
  throw InvalidArgument("unknown norm tag '" + std::string(text) + "'");
}

}  // namespace lowrank

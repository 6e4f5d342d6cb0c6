#include "threshlasso/errors.hpp"

namespace threshlasso {

void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

}  // namespace threshlasso

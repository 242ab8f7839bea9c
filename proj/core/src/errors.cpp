#include "wxreg/errors.hpp"

namespace wxreg {

std::string Error::describe() const {
  if (step_) return std::string(what()) + " (time step " + std::to_string(*step_) + ")";
  return what();
}

}  // namespace wxreg

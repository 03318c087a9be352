#include "bethe/error.hpp"

namespace bethe {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::pole: return "pole";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::sector: return "sector";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::singular: return "singular";
    case ErrorKind::limit: return "limit";
    case ErrorKind::validation: return "validation";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

}  // namespace bethe

#include "qtraj/parallel.hpp"

#include <cstdlib>
#include <string>

namespace qtraj {

unsigned default_worker_count() {
  if (const char* env = std::getenv("QTRAJ_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace qtraj

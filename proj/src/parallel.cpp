#include "tripletbench/parallel.hpp"

#include <cstdlib>
#include <string>

namespace tripletbench {

std::size_t default_thread_count() {
  if (const char* env = std::getenv("TRIPLETBENCH_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace tripletbench

#include "rankseg/parallel.hpp"

#include <cstdlib>
#include <omp.h>
#include <string>

#include "rankseg/error.hpp"

namespace rankseg {

int resolve_threads(std::optional<int> requested) {
  if (requested) return *requested;
  if (const char* env = std::getenv("RANKSEG_THREADS"); env && *env) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument,
                  std::string("RANKSEG_THREADS is not an integer: ") + env);
    }
  }
  return 0;
}

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace rankseg

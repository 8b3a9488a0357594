#include "rmdp/parallel.hpp"

#include <cstdlib>
#include <string>

namespace rmdp {

int effective_threads() {
#ifdef _OPENMP
    int threads = 0;
    if (const char* env = std::getenv("ROBUSTMDP_THREADS")) {
        try {
            threads = std::stoi(env);
        } catch (...) {
            threads = 0;
        }
    }
    if (threads <= 0) threads = omp_get_max_threads();
    return threads > 0 ? threads : 1;
#else
    return 1;
#endif
}

}  // namespace rmdp

#include "vpsal/parallel.hpp"

#include <cstdlib>
#include <string>

namespace vpsal {

int default_jobs() {
    if (const char* env = std::getenv("VPSAL_JOBS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) {
                return n;
            }
        } catch (const std::exception&) {
        }
    }
    return 1;
}

}  // namespace vpsal

#include "obscert/parallel.hpp"

#include <algorithm>

namespace obscert {

namespace {
std::atomic<int> g_jobs{0};
}

void set_default_jobs(int jobs) { g_jobs = std::max(0, jobs); }

int default_jobs() {
    const int j = g_jobs.load();
    if (j > 0) return j;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace obscert

#ifndef LLE_RNG_HPP
#define LLE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lle {

/* Portable random source for dataset generation.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Standard distributions are not portable across library
 * implementations, so conversions are done here:
 *   uniform  = ((next() >> 11) + 0.5) * 2^-53   in (0, 1)
 *   gaussian = Box-Muller on two uniforms, caching the second variate
 * Any reimplementation following these three rules reproduces our datasets. */
class PortableRng {
public:
    static constexpr const char* identity = "mt19937_64/open-uniform53/box-muller";

    explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lle

#endif

#pragma once
// Integer momentum vectors on the Z^3 lattice.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <string>

namespace fermibos {

struct Momentum {
    int64_t x = 0, y = 0, z = 0;

    friend Momentum operator+(Momentum a, Momentum b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Momentum operator-(Momentum a, Momentum b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Momentum operator-(Momentum a) { return {-a.x, -a.y, -a.z}; }
    friend bool operator==(Momentum a, Momentum b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
    friend bool operator!=(Momentum a, Momentum b) { return !(a == b); }
    // Lexicographic order; this is the canonical ordering used everywhere.
    friend bool operator<(Momentum a, Momentum b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.z < b.z;
    }

    int64_t norm2() const { return x * x + y * y + z * z; }
    bool is_zero() const { return x == 0 && y == 0 && z == 0; }

    std::string str() const {
        return "(" + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z) + ")";
    }
    friend std::ostream& operator<<(std::ostream& os, Momentum p) { return os << p.str(); }
};

struct MomentumHash {
    size_t operator()(Momentum p) const {
        // splitmix-style combine; components are small in practice
        uint64_t h = 0xcbf29ce484222325ull;
        for (uint64_t v : {static_cast<uint64_t>(p.x), static_cast<uint64_t>(p.y),
                           static_cast<uint64_t>(p.z)}) {
            h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<size_t>(h);
    }
};

} // namespace fermibos

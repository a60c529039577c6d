#pragma once
// Exception taxonomy shared by the library and the CLI.  Each class maps to a
// fixed process exit code so batch drivers can dispatch on failures.

#include <stdexcept>
#include <string>

namespace fermibos {

enum class errc : int {
    ok = 0,
    config = 2,       // bad user input: flags, config file, potential table
    construction = 3, // geometry/decomposition cannot be realized as requested
    singularity = 4,  // numerical domain violation: non-PD matrix, degenerate level, quadrature failure
    feasibility = 5,  // request exceeds resource budgets (basis size, permanent order, enumeration)
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const { return code_; }
    int exit_code() const { return static_cast<int>(code_); }

private:
    errc code_;
};

struct config_error : error {
    explicit config_error(const std::string& what) : error(errc::config, what) {}
};

struct construction_error : error {
    explicit construction_error(const std::string& what) : error(errc::construction, what) {}
};

// Raised when a mode k has an empty index set; callers skip such modes.
struct empty_mode_error : construction_error {
    explicit empty_mode_error(const std::string& what) : construction_error(what) {}
};

struct singularity_error : error {
    explicit singularity_error(const std::string& what) : error(errc::singularity, what) {}
};

// Adaptive integration could not meet its error target.
struct quadrature_error : singularity_error {
    explicit quadrature_error(const std::string& what) : singularity_error(what) {}
};

struct feasibility_error : error {
    explicit feasibility_error(const std::string& what) : error(errc::feasibility, what) {}
};

} // namespace fermibos

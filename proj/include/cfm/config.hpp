#pragma once

// Problem description as read from config files or the builtin catalogue.

#include <cfm/geometry.hpp>
#include <cfm/mesher.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfm {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tolerances {
    double eps1{1e-6};  // relative energy change accepted between FE orders
    double eps2{1e-6};  // saddle gradient norm, relative to max |grad u|
    double eps3{1e-8};  // cut start parameter on the hole boundary
    double eps4{1e-3};  // reciprocal error target
    double shrink{0.1};
    int max_outer{3};

    void validate() const;
};

struct FemOptions {
    int order{3};
    double h{0.1};
    double boundary_tol{0.0};  // <= 0: mesher default
    std::vector<RefinementRule> rules;
    bool shared_mesh{true};
    // halvings of h while the p vs p-1 energy change exceeds eps1 (opt-in)
    int max_h_refinements{0};

    void validate() const;
};

struct SymmetryAxis {
    Vec2 point{};
    Vec2 direction{0.0, 1.0};
};

struct ProblemConfig {
    std::string name;
    DomainSpec domain;
    std::vector<Vec2> marked;  // four points for quadrilaterals, else empty
    std::optional<SymmetryAxis> symmetry;
    std::optional<Vec2> gamma0_start;
    std::optional<double> reference_capacity;
    Tolerances tol;
    FemOptions fem;

    [[nodiscard]] MeshOptions mesh_options() const;
};

/// INI-like text: [domain], [fem], [tolerances] sections with `key = value`
/// lines; values are arithmetic expressions, tuples and shape calls.
[[nodiscard]] ProblemConfig parse_config(std::string_view text);

/// Reads a config file, or a builtin when given as "builtin:<name>".
[[nodiscard]] ProblemConfig load_config(const std::string& source);

[[nodiscard]] double evaluate_expression(std::string_view expr);

}  // namespace cfm

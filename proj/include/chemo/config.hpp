#pragma once

#include "chemo/liouville.hpp"
#include "chemo/ode_oracle.hpp"
#include "chemo/phase_diagram.hpp"
#include "chemo/scaling.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace chemo {

enum class Command { Classify, Sweep, Steady, Flow, Blowdown, Oracle, Functional };

std::string_view to_string(Command c) noexcept;

enum class Profile { Uniform, Gaussian, Bubble };

/// Radial density used as initial or base data: uniform, e^{-r^2/width^2}, or (1 + r^2/width^2)^{-2},
/// plus `perturb` times a random cosine series drawn from the run seed. Scaled to mass m1.
struct DensitySpec {
    Profile profile = Profile::Gaussian;
    double width = 0.5;
    double perturb = 0.0;
};

struct RunConfig {
    Command command = Command::Classify;
    Params params;
    int grid_n = kDefaultGridCells;
    GridKind grid_kind = GridKind::Uniform;
    SolveOptions solve;
    DensitySpec density;

    Range m1_range{0.1, 40.0};
    Range m2_range{0.0, 40.0};
    int resolution = 200;

    std::vector<double> psis = psi_ladder(1, 10);
    BlowdownMode mode = BlowdownMode::Full;

    FlowConfig flow;

    LemwParams lemw{1.0, 10.0 * kPi<double>, 2.0 * kPi<double>, 1e-6};
    std::vector<double> oracle_psis{1e-4, 1e-6, 1e-8};
    int oracle_steps = 4000;
};

/// Strict parse of
///
///     command = sweep
///     [params]
///     alpha = 1
///     [sweep]
///     m1_range = [0.1, 40]
///
/// '#' starts a comment. Keys before the first section are top-level. Every key is optional
/// except `command`; unknown sections or keys throw UnknownKey, malformed lines ParseError,
/// both with the line number. Params are checked with validate_params.
RunConfig parse_config(std::string_view text);

/// The fully resolved configuration in the same format, every key present. Parsing it back
/// gives the same RunConfig.
std::string echo_config(const RunConfig& cfg);

/// Shortest round-trip text is not used; outputs carry 17 significant digits, locale-free.
std::string format_number(double x);

} // namespace chemo

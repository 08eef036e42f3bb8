#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mkg/bounds.hpp"
#include "mkg/diagnostics.hpp"
#include "mkg/lattice.hpp"
#include "mkg/model.hpp"

namespace mkg {

enum class Scenario { Vacuum, FreeMaxwellWave, FreeScalarWave, GaussianPulse, InteractingDemo };

struct InitialData {
    Scenario scenario = Scenario::Vacuum;
    double amplitude = 0.1;
    int mode = 1;
    int axis = 0;
    double width = 0.1;
    bool standing = false;
};

struct IntegratorSpec {
    double dt = 0.0;
    double cfl = 0.25;
    long long steps = 100;
    double step_size(double dx) const { return dt > 0.0 ? dt : cfl * dx; }
};

struct OutputSpec {
    std::filesystem::path dir = "out";
    long long csv_every = 1;
    long long snapshot_every = 0;
    bool plots = true;
};

struct RunConfig {
    LatticeSpec lattice;
    ModelSpec model;
    InitialData initial;
    IntegratorSpec integrator;
    OutputSpec output;
    EstimateConstants estimates;
    bool fit_estimates = true;
    double mass = 1.0;
    std::uint64_t seed = 1;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string scenario_name(Scenario s);

// Fills b, C2, C3 from the Kähler family when fit_estimates is set.
EstimateConstants resolve_estimates(const RunConfig& cfg);

FieldState initial_state(const RunConfig& cfg, const Lattice& lat);
// Continuum solution of the free-wave scenarios at time t, sampled on the lattice.
FieldState analytic_state(const RunConfig& cfg, const Lattice& lat, double t);

const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& r, const EstimateConstants& c);
std::vector<DiagnosticsRecord> read_trace_csv(const std::filesystem::path& path);

struct PlotSeries {
    std::string name;
    std::vector<double> y;
};
void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::vector<double>& x,
                    const std::vector<PlotSeries>& series, bool log_y = false);

struct RunOptions {
    std::optional<std::filesystem::path> out;
    std::optional<long long> steps;
    std::optional<int> threads;
};

struct RunSummary {
    int exit_code = 0;
    std::vector<DiagnosticsRecord> trace;
    std::optional<GronwallReport> report;
    FieldState final_state;
};

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitNumerical = 3 };

RunSummary run(const RunConfig& cfg, const RunOptions& opt, std::ostream& log);

int check_geometry(const RunConfig& cfg, std::ostream& out);
int check_bounds(const std::filesystem::path& trace, std::ostream& out);

struct KirchhoffOptions {
    int order = 8;
    std::array<double, 3> k{1.0, 0.5, 0.0};
    double r0 = 1.0;
};
int kirchhoff_verify(const KirchhoffOptions& opt, std::ostream& out);

// MKG_THREADS fallback when the command line gives none; 0 keeps the default.
int resolve_threads(std::optional<int> flag);

}  // namespace mkg

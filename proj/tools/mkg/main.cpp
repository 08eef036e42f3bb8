#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mkg/cli_io.hpp"
#include "mkg/errors.hpp"

namespace {

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const mkg::ParseError& e) {
        fmt::print(stderr, "config parse error: {}\n", e.what());
        return mkg::kExitConfig;
    } catch (const mkg::ValidationError& e) {
        fmt::print(stderr, "config validation error: {}\n", e.what());
        return mkg::kExitConfig;
    } catch (const mkg::IoError& e) {
        fmt::print(stderr, "io error: {}\n", e.what());
        return mkg::kExitConfig;
    } catch (const mkg::NonFinite& e) {
        fmt::print(stderr, "numerical abort: {}\n", e.what());
        return mkg::kExitNumerical;
    } catch (const mkg::RadiusExceeded& e) {
        fmt::print(stderr, "numerical abort: {}\n", e.what());
        return mkg::kExitNumerical;
    } catch (const mkg::DegenerateMetric& e) {
        fmt::print(stderr, "numerical abort: {}\n", e.what());
        return mkg::kExitNumerical;
    } catch (const mkg::Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return mkg::kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lattice simulator and bound auditor for Maxwell-Klein-Gordon systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir, trace_path;
    std::optional<long long> steps;
    std::optional<int> threads;
    auto* run = app.add_subcommand("run", "evolve a configured scenario and audit the trace");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--out", out_dir, "output directory (overrides output.dir)");
    run->add_option("--steps", steps, "number of steps (overrides integrator.steps)");
    run->add_option("--threads", threads, "worker threads (falls back to MKG_THREADS)");

    std::string geo_config;
    auto* geo = app.add_subcommand("check-geometry", "metric oracle and bound checks for a configured Kähler family");
    geo->add_option("--config", geo_config, "configuration file")->required();

    auto* bounds = app.add_subcommand("check-bounds", "Gronwall audit of an existing trace.csv");
    bounds->add_option("--trace", trace_path, "trace file")->required()->check(CLI::ExistingFile);

    mkg::KirchhoffOptions kopt;
    std::vector<double> kvec;
    auto* kir = app.add_subcommand("kirchhoff-verify", "spherical-means representation on plane waves");
    kir->add_option("--order", kopt.order, "quadrature order")->check(CLI::Range(0, 64));
    kir->add_option("--k", kvec, "wave vector kx,ky,kz")->delimiter(',')->expected(3);
    kir->add_option("--r0", kopt.r0, "sphere radius")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    if (*run) {
        return guarded([&] {
            mkg::RunConfig cfg = mkg::load_config(config_path);
            mkg::RunOptions opt;
            if (!out_dir.empty()) opt.out = out_dir;
            opt.steps = steps;
            opt.threads = threads;
            return mkg::run(cfg, opt, std::cout).exit_code;
        });
    }
    if (*geo) return guarded([&] { return mkg::check_geometry(mkg::load_config(geo_config), std::cout); });
    if (*bounds) return guarded([&] { return mkg::check_bounds(trace_path, std::cout); });
    if (*kir) {
        if (kvec.size() == 3) kopt.k = {kvec[0], kvec[1], kvec[2]};
        return guarded([&] { return mkg::kirchhoff_verify(kopt, std::cout); });
    }
    return 0;
}

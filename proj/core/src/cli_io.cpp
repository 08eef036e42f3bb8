#include "mkg/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mkg/dynamics.hpp"
#include "mkg/errors.hpp"
#include "mkg/kahler.hpp"
#include "mkg/parallel.hpp"
#include "mkg/spherical_means.hpp"

namespace mkg {

namespace {

struct Entry {
    std::string value;
    int line;
    int key_col;
    int value_col;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"lattice", {"dims", "dx", "length"}},
        {"model", {"n_gauge", "n_scalar", "charges"}},
        {"couplings", {"h.kind", "h.base", "h.mod", "h.amplitude", "k.kind", "k.base", "k.mod", "k.amplitude"}},
        {"kahler", {"kind", "coefficients", "r_max", "C1", "c1", "c2"}},
        {"potential", {"kind", "coefficients", "v0", "lambda", "toda"}},
        {"initial", {"scenario", "amplitude", "mode", "axis", "width", "standing", "seed"}},
        {"integrator", {"dt", "cfl", "steps", "stencil_order"}},
        {"output", {"dir", "csv_every", "snapshot_every", "plots"}},
        {"estimates", {"fit", "b", "C1", "C2", "C3", "c4", "N", "mass"}},
    };
    return s;
}

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

class Document {
public:
    explicit Document(std::string_view text) {
        std::string current;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t nl = text.find('\n', pos);
            std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            std::string line(raw);
            if (std::size_t h = line.find('#'); h != std::string::npos) line.resize(h);
            std::size_t first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == ';') continue;
            if (line[first] == '[') {
                std::size_t close = line.find(']', first);
                if (close == std::string::npos) throw ParseError("unterminated section header", line_no, int(first) + 1);
                current = trim(std::string_view(line).substr(first + 1, close - first - 1));
                if (!schema().contains(current))
                    throw ParseError(fmt::format("unknown section [{}]", current), line_no, int(first) + 2);
                if (!trim(std::string_view(line).substr(close + 1)).empty())
                    throw ParseError("trailing text after section header", line_no, int(close) + 2);
                sections_[current];
                continue;
            }
            std::size_t eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("expected key = value", line_no, int(first) + 1);
            std::string key = trim(std::string_view(line).substr(first, eq - first));
            if (key.empty()) throw ParseError("empty key", line_no, int(first) + 1);
            std::string section = current;
            if (std::size_t dot = key.find('.'); dot != std::string::npos && schema().contains(key.substr(0, dot))) {
                section = key.substr(0, dot);
                key = key.substr(dot + 1);
            } else if (current.empty()) {
                throw ParseError(fmt::format("unknown key '{}'", key), line_no, int(first) + 1);
            }
            if (!schema().at(section).contains(key))
                throw ParseError(fmt::format("unknown key '{}.{}'", section, key), line_no, int(first) + 1);
            std::size_t vstart = line.find_first_not_of(" \t", eq + 1);
            std::string value = vstart == std::string::npos ? std::string() : trim(std::string_view(line).substr(vstart));
            int vcol = vstart == std::string::npos ? int(eq) + 2 : int(vstart) + 1;
            if (value.empty()) throw ParseError(fmt::format("missing value for '{}.{}'", section, key), line_no, vcol);
            auto [it, inserted] = sections_[section].emplace(key, Entry{value, line_no, int(first) + 1, vcol});
            if (!inserted)
                throw ParseError(fmt::format("duplicate key '{}.{}'", section, key), line_no, int(first) + 1);
        }
    }

    const Entry* find(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        auto e = s->second.find(key);
        return e == s->second.end() ? nullptr : &e->second;
    }

private:
    std::map<std::string, Section> sections_;
};

double to_double(const std::string& s, const Entry& e, const std::string& name) {
    std::string t = trim(s);
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw ParseError(fmt::format("'{}' is not a number for '{}'", t, name), e.line, e.value_col);
    return v;
}

long long to_int(const std::string& s, const Entry& e, const std::string& name) {
    std::string t = trim(s);
    long long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw ParseError(fmt::format("'{}' is not an integer for '{}'", t, name), e.line, e.value_col);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

class Reader {
public:
    explicit Reader(const Document& d) : doc_(d) {}

    template <class T>
    void get(const std::string& sec, const std::string& key, T& out) {
        const Entry* e = doc_.find(sec, key);
        if (!e) return;
        std::string name = sec + "." + key;
        if constexpr (std::is_same_v<T, double>) {
            out = to_double(e->value, *e, name);
        } else if constexpr (std::is_same_v<T, bool>) {
            if (e->value == "true" || e->value == "1" || e->value == "yes") {
                out = true;
            } else if (e->value == "false" || e->value == "0" || e->value == "no") {
                out = false;
            } else {
                throw ParseError(fmt::format("'{}' is not a boolean for '{}'", e->value, name), e->line, e->value_col);
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            out = e->value;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            out.clear();
            for (const std::string& p : split(e->value, ',')) out.push_back(to_double(p, *e, name));
        } else {
            out = static_cast<T>(to_int(e->value, *e, name));
        }
    }

    bool has(const std::string& sec, const std::string& key) const { return doc_.find(sec, key) != nullptr; }
    const Entry& entry(const std::string& sec, const std::string& key) const { return *doc_.find(sec, key); }

    // "a" means a·I; otherwise rows separated by ';' with ',' between entries.
    std::optional<SmallMat> matrix(const std::string& sec, const std::string& key, int n) {
        const Entry* e = doc_.find(sec, key);
        if (!e) return std::nullopt;
        std::string name = sec + "." + key;
        std::vector<std::string> rows = split(e->value, ';');
        if (rows.size() == 1 && rows[0].find(',') == std::string::npos)
            return SmallMat(SmallMat::Identity(n, n) * to_double(rows[0], *e, name));
        if (int(rows.size()) != n) throw ValidationError(name, fmt::format("expected {} rows", n));
        SmallMat m(n, n);
        for (int r = 0; r < n; ++r) {
            std::vector<std::string> cols = split(rows[r], ',');
            if (int(cols.size()) != n) throw ValidationError(name, fmt::format("expected {} columns", n));
            for (int c = 0; c < n; ++c) m(r, c) = to_double(cols[c], *e, name);
        }
        return m;
    }

private:
    const Document& doc_;
};

CouplingKind coupling_kind(const std::string& v, const std::string& key) {
    if (v == "constant") return CouplingKind::Constant;
    if (v == "saturating") return CouplingKind::Saturating;
    throw ValidationError(key, fmt::format("unknown kind '{}'", v));
}

Scenario parse_scenario(const std::string& v) {
    if (v == "vacuum") return Scenario::Vacuum;
    if (v == "free_maxwell_wave") return Scenario::FreeMaxwellWave;
    if (v == "free_scalar_wave") return Scenario::FreeScalarWave;
    if (v == "gaussian_pulse") return Scenario::GaussianPulse;
    if (v == "interacting_demo") return Scenario::InteractingDemo;
    throw ValidationError("initial.scenario", fmt::format("unknown scenario '{}'", v));
}

}  // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Vacuum: return "vacuum";
        case Scenario::FreeMaxwellWave: return "free_maxwell_wave";
        case Scenario::FreeScalarWave: return "free_scalar_wave";
        case Scenario::GaussianPulse: return "gaussian_pulse";
        case Scenario::InteractingDemo: return "interacting_demo";
    }
    return "unknown";
}

RunConfig parse_config(std::string_view text) {
    Document doc(text);
    Reader rd(doc);
    RunConfig cfg;

    std::vector<double> dims;
    rd.get("lattice", "dims", dims);
    if (!dims.empty()) {
        if (dims.size() > 3) throw ValidationError("lattice.dims", "at most three extents");
        cfg.lattice.dims = {1, 1, 1};
        for (std::size_t d = 0; d < dims.size(); ++d) {
            if (dims[d] != std::floor(dims[d])) throw ValidationError("lattice.dims", "extents must be integers");
            cfg.lattice.dims[d] = int(dims[d]);
        }
    } else {
        cfg.lattice.dims = {64, 1, 1};
    }
    if (rd.has("lattice", "dx") && rd.has("lattice", "length"))
        throw ValidationError("lattice.length", "give either dx or length, not both");
    cfg.lattice.dx = 1.0 / cfg.lattice.dims[0];
    rd.get("lattice", "dx", cfg.lattice.dx);
    if (rd.has("lattice", "length")) {
        double len = 0.0;
        rd.get("lattice", "length", len);
        if (!(len > 0.0)) throw ValidationError("lattice.length", "must be positive");
        cfg.lattice.dx = len / cfg.lattice.dims[0];
    }
    rd.get("integrator", "stencil_order", cfg.lattice.stencil_order);
    cfg.lattice.validate();

    int nv = 1, nc = 1;
    rd.get("model", "n_gauge", nv);
    rd.get("model", "n_scalar", nc);
    if (nv < 1 || nv > kMaxComponents) throw ValidationError("model.n_gauge", "must be in [1, 8]");
    if (nc < 1 || nc > kMaxComponents) throw ValidationError("model.n_scalar", "must be in [1, 8]");
    ModelSpec& m = cfg.model;
    m = ModelSpec::free(nv, nc);
    std::vector<double> charges;
    rd.get("model", "charges", charges);
    if (charges.size() == 1) charges.assign(nv, charges[0]);
    if (!charges.empty()) {
        if (int(charges.size()) != nv) throw ValidationError("model.charges", "need one charge per gauge field");
        m.charges = charges;
    }

    CouplingFamily& cf = m.couplings;
    std::string kind;
    if (rd.has("couplings", "h.kind")) {
        rd.get("couplings", "h.kind", kind);
        cf.h_kind = coupling_kind(kind, "couplings.h.kind");
    }
    if (rd.has("couplings", "k.kind")) {
        rd.get("couplings", "k.kind", kind);
        cf.k_kind = coupling_kind(kind, "couplings.k.kind");
    }
    if (auto v = rd.matrix("couplings", "h.base", nv)) cf.h_base = *v;
    if (auto v = rd.matrix("couplings", "h.mod", nv)) cf.h_mod = *v;
    if (auto v = rd.matrix("couplings", "k.base", nv)) cf.k_base = *v;
    if (auto v = rd.matrix("couplings", "k.mod", nv)) cf.k_mod = *v;
    rd.get("couplings", "h.amplitude", cf.h_amplitude);
    rd.get("couplings", "k.amplitude", cf.k_amplitude);
    try {
        cf.validate();
    } catch (const IndefiniteCoupling& e) {
        throw ValidationError("couplings.h.base", e.what());
    } catch (const InvalidFamily& e) {
        throw ValidationError("couplings", e.what());
    }

    std::string kk = "flat";
    rd.get("kahler", "kind", kk);
    if (kk == "flat") {
        m.kahler = KahlerFamily::flat();
        if (rd.has("kahler", "coefficients"))
            throw ValidationError("kahler.coefficients", "only valid with kind = polynomial");
    } else if (kk == "polynomial") {
        std::vector<double> co;
        rd.get("kahler", "coefficients", co);
        if (co.empty()) throw ValidationError("kahler.coefficients", "required for kind = polynomial");
        m.kahler = KahlerFamily::polynomial(co);
    } else {
        throw ValidationError("kahler.kind", fmt::format("unknown kind '{}'", kk));
    }
    rd.get("kahler", "r_max", m.kahler.r_max);
    rd.get("kahler", "C1", m.kahler.C1);
    if (rd.has("kahler", "c1") || rd.has("kahler", "c2")) m.kahler.lower_bound_configured = true;
    rd.get("kahler", "c1", m.kahler.c1);
    rd.get("kahler", "c2", m.kahler.c2);
    try {
        m.kahler.validate();
    } catch (const Error& e) {
        throw ValidationError("kahler", e.what());
    }

    std::string pk = "zero";
    rd.get("potential", "kind", pk);
    if (pk == "zero") {
        m.potential = PotentialFamily::zero();
    } else if (pk == "polynomial") {
        std::vector<double> co;
        rd.get("potential", "coefficients", co);
        m.potential = PotentialFamily::polynomial(co);
    } else if (pk == "sine_gordon") {
        double v0 = 0.0, lambda = 0.0;
        rd.get("potential", "v0", v0);
        rd.get("potential", "lambda", lambda);
        m.potential = PotentialFamily::sine_gordon(v0, lambda);
    } else if (pk == "toda") {
        if (!rd.has("potential", "toda")) throw ValidationError("potential.toda", "required for kind = toda");
        const Entry& e = rd.entry("potential", "toda");
        std::vector<std::pair<double, double>> pairs;
        for (const std::string& item : split(e.value, ',')) {
            std::vector<std::string> ab = split(item, ':');
            if (ab.size() != 2) throw ParseError("toda terms are written a:lambda", e.line, e.value_col);
            pairs.emplace_back(to_double(ab[0], e, "potential.toda"), to_double(ab[1], e, "potential.toda"));
        }
        m.potential = PotentialFamily::toda_sum(pairs);
    } else {
        throw ValidationError("potential.kind", fmt::format("unknown kind '{}'", pk));
    }
    try {
        m.potential.validate();
    } catch (const Error& e) {
        throw ValidationError("potential", e.what());
    }
    m.validate();

    std::string sc = "vacuum";
    rd.get("initial", "scenario", sc);
    cfg.initial.scenario = parse_scenario(sc);
    rd.get("initial", "amplitude", cfg.initial.amplitude);
    rd.get("initial", "mode", cfg.initial.mode);
    rd.get("initial", "axis", cfg.initial.axis);
    rd.get("initial", "width", cfg.initial.width);
    rd.get("initial", "standing", cfg.initial.standing);
    rd.get("initial", "seed", cfg.seed);
    if (cfg.initial.axis < 0 || cfg.initial.axis > 2) throw ValidationError("initial.axis", "must be 0, 1 or 2");
    int extent = cfg.lattice.dims[cfg.initial.axis];
    if (cfg.initial.mode < 0 || 2 * cfg.initial.mode >= extent)
        throw ValidationError("initial.mode", fmt::format("must lie in [0, {}) to be resolved", (extent + 1) / 2));
    if (!(cfg.initial.width > 0.0)) throw ValidationError("initial.width", "must be positive");
    if (cfg.initial.scenario == Scenario::GaussianPulse && cfg.initial.width < 2.0 * cfg.lattice.dx)
        throw ValidationError("initial.width", "pulse must span at least two lattice spacings");

    rd.get("integrator", "dt", cfg.integrator.dt);
    rd.get("integrator", "cfl", cfg.integrator.cfl);
    rd.get("integrator", "steps", cfg.integrator.steps);
    if (rd.has("integrator", "dt") && rd.has("integrator", "cfl"))
        throw ValidationError("integrator.dt", "give either dt or cfl, not both");
    if (cfg.integrator.dt < 0.0) throw ValidationError("integrator.dt", "must be positive");
    if (!(cfg.integrator.step_size(cfg.lattice.dx) > 0.0)) throw ValidationError("integrator.cfl", "must be positive");
    if (cfg.integrator.step_size(cfg.lattice.dx) > cfg.lattice.dx)
        throw ValidationError("integrator.cfl", "time step exceeds the lattice spacing");
    if (cfg.integrator.steps < 1) throw ValidationError("integrator.steps", "must be at least 1");

    std::string dir;
    rd.get("output", "dir", dir);
    if (!dir.empty()) cfg.output.dir = dir;
    rd.get("output", "csv_every", cfg.output.csv_every);
    rd.get("output", "snapshot_every", cfg.output.snapshot_every);
    rd.get("output", "plots", cfg.output.plots);
    if (cfg.output.csv_every < 1) throw ValidationError("output.csv_every", "must be at least 1");
    if (cfg.output.snapshot_every < 0) throw ValidationError("output.snapshot_every", "must be nonnegative");

    EstimateConstants& ec = cfg.estimates;
    rd.get("estimates", "fit", cfg.fit_estimates);
    for (const char* key : {"b", "C2", "C3"})
        if (cfg.fit_estimates && rd.has("estimates", key))
            throw ValidationError(std::string("estimates.") + key, "set fit = false to give fitted constants by hand");
    rd.get("estimates", "b", ec.b);
    ec.C1 = m.kahler.C1;
    rd.get("estimates", "C1", ec.C1);
    rd.get("estimates", "C2", ec.C2);
    rd.get("estimates", "C3", ec.C3);
    rd.get("estimates", "c4", ec.c4);
    if (rd.has("estimates", "N")) {
        rd.get("estimates", "N", ec.N);
    } else if (m.potential.kind == PotentialKind::Polynomial) {
        ec.N = std::max(1, int(m.potential.coefficients.size()) - 1);
    }
    rd.get("estimates", "mass", cfg.mass);
    if (!(cfg.mass > 0.0)) throw ValidationError("estimates.mass", "must be positive");
    ec.potential_kind = m.potential.kind;
    ec.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

EstimateConstants resolve_estimates(const RunConfig& cfg) {
    EstimateConstants c = cfg.estimates;
    if (cfg.fit_estimates) {
        double r_hi = std::min(cfg.model.kahler.r_max, 2.0);
        KahlerFamily f = fit_bound_constants(cfg.model.kahler, uniform_radii(r_hi, 1000));
        c.b = f.b;
        c.C2 = f.C2;
        c.C3 = f.C3;
    }
    return c;
}

namespace {

struct WaveGeometry {
    int axis;
    int pol;
    double k;
    double length;
};

WaveGeometry wave_geometry(const RunConfig& cfg) {
    WaveGeometry g;
    g.axis = cfg.initial.axis;
    g.pol = (g.axis + 1) % 3;
    g.length = cfg.lattice.dims[g.axis] * cfg.lattice.dx;
    g.k = 2.0 * std::numbers::pi * cfg.initial.mode / g.length;
    return g;
}

double scalar_mass_squared(const ModelSpec& m) {
    if (m.potential.kind != PotentialKind::Polynomial) return 0.0;
    return m.potential.coefficients.size() > 1 ? m.potential.coefficients[1] : 0.0;
}

double along(const Lattice& lat, std::size_t x, int axis) { return lat.coords(x)[axis] * lat.dx(); }

void fill_free_wave(const RunConfig& cfg, const Lattice& lat, FieldState& s, double t) {
    WaveGeometry g = wave_geometry(cfg);
    double a = cfg.initial.amplitude;
    bool standing = cfg.initial.standing;
    if (cfg.initial.scenario == Scenario::FreeMaxwellWave) {
        double w = g.k;
        for (std::size_t x = 0; x < lat.sites(); ++x) {
            double z = along(lat, x, g.axis);
            if (standing) {
                s.A[s.gidx(0, g.pol, x)] = a * std::sin(g.k * z) * std::cos(w * t);
                s.E[s.gidx(0, g.pol, x)] = a * w * std::sin(g.k * z) * std::sin(w * t);
            } else {
                s.A[s.gidx(0, g.pol, x)] = a * std::sin(g.k * z - w * t);
                s.E[s.gidx(0, g.pol, x)] = a * w * std::cos(g.k * z - w * t);
            }
        }
    } else {
        double w = std::sqrt(g.k * g.k + scalar_mass_squared(cfg.model));
        for (std::size_t x = 0; x < lat.sites(); ++x) {
            double z = along(lat, x, g.axis);
            if (standing) {
                s.phi[s.sidx(0, x)] = a * std::sin(g.k * z) * std::cos(w * t);
                s.pi[s.sidx(0, x)] = -a * w * std::sin(g.k * z) * std::sin(w * t);
            } else {
                cplx f = std::polar(a, g.k * z - w * t);
                s.phi[s.sidx(0, x)] = f;
                s.pi[s.sidx(0, x)] = cplx(0.0, -w) * f;
            }
        }
    }
}

double periodic_offset(double z, double center, double length) {
    double d = z - center;
    return d - length * std::round(d / length);
}

void fill_gaussian_pulse(const RunConfig& cfg, const Lattice& lat, FieldState& s) {
    WaveGeometry g = wave_geometry(cfg);
    double a = cfg.initial.amplitude, w = cfg.initial.width;
    std::array<double, 3> len{}, center{};
    for (int d = 0; d < 3; ++d) {
        len[d] = cfg.lattice.dims[d] * cfg.lattice.dx;
        center[d] = 0.5 * len[d];
    }
    for (std::size_t x = 0; x < lat.sites(); ++x) {
        auto p = lat.position(x);
        double r2 = 0.0;
        for (int d = 0; d < 3; ++d) {
            if (cfg.lattice.dims[d] == 1) continue;
            double o = periodic_offset(p[d], center[d], len[d]);
            r2 += o * o;
        }
        double bump = std::exp(-r2 / (2.0 * w * w));
        for (int c = 0; c < s.n_scalar; ++c) s.phi[s.sidx(c, x)] = std::polar(a * bump / (c + 1), 0.5 * c);
        double zo = periodic_offset(p[g.axis], center[g.axis], len[g.axis]);
        s.A[s.gidx(0, g.pol, x)] = a * std::exp(-zo * zo / (2.0 * w * w));
    }
}

// Random band-limited profile along one axis: Σ_{m=1..3} a_m sin(2π m z / L + θ_m).
class Profile {
public:
    Profile(std::mt19937_64& rng, double scale, double length) : length_(length) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int m = 0; m < 3; ++m) {
            amp_[m] = scale * u(rng) / (m + 1);
            phase_[m] = std::numbers::pi * u(rng);
        }
    }
    double operator()(double z) const {
        double v = 0.0;
        for (int m = 0; m < 3; ++m) v += amp_[m] * std::sin(2.0 * std::numbers::pi * (m + 1) * z / length_ + phase_[m]);
        return v;
    }

private:
    double length_;
    std::array<double, 3> amp_{}, phase_{};
};

// Transverse gauge fields, E along the axis zero, π = λφ with λ real: the charge density and Gauss residual vanish.
void fill_interacting(const RunConfig& cfg, const Lattice& lat, FieldState& s) {
    WaveGeometry g = wave_geometry(cfg);
    std::mt19937_64 rng(cfg.seed);
    double a = cfg.initial.amplitude;
    for (int L = 0; L < s.n_gauge; ++L)
        for (int i : {g.pol, (g.axis + 2) % 3}) {
            Profile pa(rng, a, g.length), pe(rng, a, g.length);
            for (std::size_t x = 0; x < lat.sites(); ++x) {
                double z = along(lat, x, g.axis);
                s.A[s.gidx(L, i, x)] = pa(z);
                s.E[s.gidx(L, i, x)] = pe(z);
            }
        }
    Profile lambda(rng, 1.0, g.length);
    for (int c = 0; c < s.n_scalar; ++c) {
        Profile re(rng, a, g.length), im(rng, a, g.length);
        for (std::size_t x = 0; x < lat.sites(); ++x) {
            double z = along(lat, x, g.axis);
            cplx f(re(z), im(z));
            s.phi[s.sidx(c, x)] = f;
            s.pi[s.sidx(c, x)] = lambda(z) * f;
        }
    }
}

}  // namespace

FieldState initial_state(const RunConfig& cfg, const Lattice& lat) {
    FieldState s(cfg.model.n_gauge, cfg.model.n_scalar, lat.sites());
    switch (cfg.initial.scenario) {
        case Scenario::Vacuum: break;
        case Scenario::FreeMaxwellWave:
        case Scenario::FreeScalarWave: fill_free_wave(cfg, lat, s, 0.0); break;
        case Scenario::GaussianPulse: fill_gaussian_pulse(cfg, lat, s); break;
        case Scenario::InteractingDemo: fill_interacting(cfg, lat, s); break;
    }
    return s;
}

FieldState analytic_state(const RunConfig& cfg, const Lattice& lat, double t) {
    FieldState s(cfg.model.n_gauge, cfg.model.n_scalar, lat.sites());
    s.t = t;
    switch (cfg.initial.scenario) {
        case Scenario::Vacuum: return s;
        case Scenario::FreeMaxwellWave:
        case Scenario::FreeScalarWave: fill_free_wave(cfg, lat, s, t); return s;
        default: throw InvalidFamily(fmt::format("scenario {} has no closed-form solution", scenario_name(cfg.initial.scenario)));
    }
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "t",        "E0",        "J",         "J_envelope", "E0_sf",     "E1_sf",   "gauss_l2", "gauss_linf",
        "bianchi_linf", "linf_phi", "linf_dphi", "linf_Dphi", "linf_F",  "linf_A",  "linf_dPsi", "l2_E",
        "l2_H",     "l2_Dphi",   "l2_phi",    "l2_V",       "L",         "M",       "N",        "S",
        "X",        "U",         "W",         "G"};
    return cols;
}

std::string csv_header() {
    std::string h;
    for (const std::string& c : csv_columns()) h += (h.empty() ? "" : ",") + c;
    return h;
}

std::string csv_row(const DiagnosticsRecord& r, const EstimateConstants& c) {
    NormSnapshot s = r.norm_snapshot;
    s.t = r.t;
    LMN lmn = eval_LMN(s, c);
    SXUW sx = eval_SXUW(s, c);
    std::vector<double> v{r.t,
                          r.energy_E0,
                          r.flat_J,
                          c.J0 * (1.0 + r.t),
                          r.sobolev_E0,
                          r.sobolev_E1,
                          r.gauss_res_l2,
                          r.gauss_res_linf,
                          r.bianchi_res_linf,
                          s.linf_phi,
                          s.linf_dphi,
                          s.linf_Dphi,
                          s.linf_F,
                          s.linf_A,
                          s.linf_dPsi,
                          s.l2_E,
                          s.l2_H,
                          s.l2_Dphi,
                          s.l2_phi,
                          s.l2_V,
                          lmn.L,
                          lmn.M,
                          lmn.N,
                          sx.S,
                          sx.X,
                          sx.U,
                          sx.W,
                          s.linf_F + s.linf_Dphi};
    std::string row;
    for (std::size_t k = 0; k < v.size(); ++k) row += (k ? "," : "") + fmt::format("{:.17g}", v[k]);
    return row;
}

std::vector<DiagnosticsRecord> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open trace '{}'", path.string()));
    std::string line;
    if (!std::getline(in, line)) throw IoError(fmt::format("trace '{}' is empty", path.string()));
    std::vector<std::string> header = split(line, ',');
    std::map<std::string, std::size_t> col;
    for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
    for (const std::string& c : csv_columns())
        if (!col.contains(c)) throw IoError(fmt::format("trace '{}' lacks column '{}'", path.string(), c));
    std::vector<DiagnosticsRecord> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> f = split(line, ',');
        if (f.size() != header.size())
            throw IoError(fmt::format("{}:{}: expected {} fields, found {}", path.string(), line_no, header.size(), f.size()));
        auto get = [&](const char* name) {
            const std::string& t = f[col[name]];
            double v = 0.0;
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || p != t.data() + t.size())
                throw IoError(fmt::format("{}:{}: bad number '{}' in column {}", path.string(), line_no, t, name));
            return v;
        };
        DiagnosticsRecord r;
        r.t = get("t");
        r.energy_E0 = get("E0");
        r.flat_J = get("J");
        r.sobolev_E0 = get("E0_sf");
        r.sobolev_E1 = get("E1_sf");
        r.gauss_res_l2 = get("gauss_l2");
        r.gauss_res_linf = get("gauss_linf");
        r.bianchi_res_linf = get("bianchi_linf");
        NormSnapshot& s = r.norm_snapshot;
        s.t = r.t;
        s.linf_phi = get("linf_phi");
        s.linf_dphi = get("linf_dphi");
        s.linf_Dphi = get("linf_Dphi");
        s.linf_F = get("linf_F");
        s.linf_A = get("linf_A");
        s.linf_dPsi = get("linf_dPsi");
        s.l2_E = get("l2_E");
        s.l2_H = get("l2_H");
        s.l2_Dphi = get("l2_Dphi");
        s.l2_phi = get("l2_phi");
        s.l2_V = get("l2_V");
        out.push_back(r);
    }
    return out;
}

void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::vector<double>& x,
                    const std::vector<PlotSeries>& series, bool log_y) {
    const double W = 720, H = 420, ml = 80, mr = 20, mt = 40, mb = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    auto tr = [&](double v) {
        if (!log_y) return v;
        return v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN();
    };
    double x0 = x.empty() ? 0.0 : x.front(), x1 = x.empty() ? 1.0 : x.back();
    double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
    for (const PlotSeries& s : series)
        for (double v : s.y) {
            double u = tr(v);
            if (std::isfinite(u)) {
                y0 = std::min(y0, u);
                y1 = std::max(y1, u);
            }
        }
    if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
    if (y1 - y0 < 1e-300) {
        double pad = std::max(1e-12, std::abs(y0) * 1e-6);
        y0 -= pad;
        y1 += pad;
    }
    if (x1 <= x0) x1 = x0 + 1.0;
    auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb); };

    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot write plot '{}'", path.string()));
    fmt::print(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"12\">\n", W, H);
    fmt::print(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    fmt::print(out, "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", W / 2, title);
    fmt::print(out, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", ml, mt,
               W - ml - mr, H - mt - mb);
    for (int k = 0; k <= 4; ++k) {
        double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        fmt::print(out, "<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", px(xv), H - mb + 18, xv);
        std::string label = log_y ? fmt::format("1e{:.1f}", yv) : fmt::format("{:.4g}", yv);
        fmt::print(out, "<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", ml - 6, py(yv) + 4, label);
    }
    fmt::print(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">t</text>\n", (ml + W - mr) / 2, H - 12);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = colors[k % 6];
        std::string pts;
        for (std::size_t j = 0; j < x.size() && j < series[k].y.size(); ++j) {
            double u = tr(series[k].y[j]);
            if (!std::isfinite(u)) continue;
            pts += fmt::format("{:.2f},{:.2f} ", px(x[j]), py(u));
        }
        fmt::print(out, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, pts);
        fmt::print(out, "<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", ml + 10, mt + 16 + 16 * k, color,
                   series[k].name);
    }
    fmt::print(out, "</svg>\n");
}

namespace {

void write_estimates_sidecar(const std::filesystem::path& path, const EstimateConstants& c) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    std::string b;
    for (double v : c.b) b += (b.empty() ? "" : ",") + fmt::format("{:.17g}", v);
    if (b.empty()) b = "0";
    fmt::print(out, "b = {}\nC1 = {:.17g}\nC2 = {:.17g}\nC3 = {:.17g}\nc4 = {:.17g}\nN = {}\npotential = {}\n", b, c.C1,
               c.C2, c.C3, c.c4, c.N, int(c.potential_kind));
}

EstimateConstants read_estimates_sidecar(const std::filesystem::path& path) {
    EstimateConstants c;
    std::ifstream in(path);
    if (!in) return c;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        Entry e{val, line_no, 1, int(eq) + 2};
        if (key == "b") {
            c.b.clear();
            for (const std::string& p : split(val, ',')) c.b.push_back(to_double(p, e, key));
        } else if (key == "C1") {
            c.C1 = to_double(val, e, key);
        } else if (key == "C2") {
            c.C2 = to_double(val, e, key);
        } else if (key == "C3") {
            c.C3 = to_double(val, e, key);
        } else if (key == "c4") {
            c.c4 = to_double(val, e, key);
        } else if (key == "N") {
            c.N = int(to_int(val, e, key));
        } else if (key == "potential") {
            c.potential_kind = PotentialKind(to_int(val, e, key));
        } else {
            throw ParseError(fmt::format("unknown key '{}'", key), line_no, 1);
        }
    }
    return c;
}

void emit_plots(const std::filesystem::path& dir, const std::vector<DiagnosticsRecord>& trace, double J0) {
    std::vector<double> t, E0, J, env, gl2, bia;
    for (const DiagnosticsRecord& r : trace) {
        t.push_back(r.t);
        E0.push_back(r.energy_E0);
        J.push_back(r.flat_J);
        env.push_back(J0 * (1.0 + r.t));
        gl2.push_back(r.gauss_res_l2);
        bia.push_back(r.bianchi_res_linf);
    }
    write_svg_plot(dir / "energy.svg", "Energy E0", t, {{"E0", E0}});
    write_svg_plot(dir / "flat_energy.svg", "Flat energy J and linear envelope", t,
                   {{"J", J}, {"J0 (1 + t)", env}});
    write_svg_plot(dir / "constraints.svg", "Constraint residuals", t,
                   {{"Gauss L2", gl2}, {"Bianchi Linf", bia}}, true);
}

}  // namespace

int resolve_threads(std::optional<int> flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("MKG_THREADS")) {
        int v = 0;
        std::string_view sv(env);
        auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
        if (ec == std::errc() && p == sv.data() + sv.size() && v > 0) return v;
    }
    return 0;
}

RunSummary run(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
    RunSummary sum;
    if (int th = resolve_threads(opt.threads); th > 0) set_thread_count(th);
    std::filesystem::path dir = opt.out.value_or(cfg.output.dir);
    long long steps = opt.steps.value_or(cfg.integrator.steps);
    if (steps < 1) throw ValidationError("integrator.steps", "must be at least 1");

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
    std::ofstream csv(dir / "trace.csv", std::ios::binary);
    if (!csv) throw IoError(fmt::format("output directory '{}' is not writable", dir.string()));
    if (cfg.output.snapshot_every > 0) std::filesystem::create_directories(dir / "snapshots");

    Lattice lat(cfg.lattice);
    const ModelSpec& model = cfg.model;
    FieldState s = initial_state(cfg, lat);
    auto abort = [&](const FieldState& y, const std::string& what) {
        std::filesystem::create_directories(dir / "snapshots");
        write_snapshot(dir / "snapshots" / "abort.mkg", y, cfg.lattice);
        fmt::print(log, "numerical abort: {}\n", what);
        sum.exit_code = kExitNumerical;
        sum.final_state = y;
        return sum;
    };
    try {
        check_radius(s, model);
    } catch (const RadiusExceeded& e) {
        return abort(s, fmt::format("initial data: {}", e.what()));
    }
    EstimateConstants c = resolve_estimates(cfg);
    double dt = cfg.integrator.step_size(cfg.lattice.dx);
    double c1 = model.kahler.c1;

    fmt::print(log, "scenario {} on {}x{}x{} sites, dx = {}, dt = {}, {} steps\n", scenario_name(cfg.initial.scenario),
               cfg.lattice.dims[0], cfg.lattice.dims[1], cfg.lattice.dims[2], cfg.lattice.dx, dt, steps);

    csv << csv_header() << '\n';
    auto record = [&](const FieldState& y) {
        DiagnosticsRecord r = diagnose(y, lat, model, cfg.mass, c1);
        if (sum.trace.empty()) c.J0 = r.flat_J;
        csv << csv_row(r, c) << '\n';
        sum.trace.push_back(r);
    };
    auto snapshot = [&](const FieldState& y, const std::string& name) {
        write_snapshot(dir / "snapshots" / name, y, cfg.lattice);
    };

    record(s);
    for (long long n = 1; n <= steps; ++n) {
        try {
            s = step_rk4(s, lat, model, dt, n);
        } catch (const NonFinite& e) {
            return abort(s, fmt::format("step {}, site {}: {}", e.step, e.site, e.what()));
        } catch (const RadiusExceeded& e) {
            return abort(s, fmt::format("step {}: {}", n, e.what()));
        } catch (const DegenerateMetric& e) {
            return abort(s, fmt::format("step {}: {}", n, e.what()));
        }
        if (n % cfg.output.csv_every == 0 || n == steps) record(s);
        if (cfg.output.snapshot_every > 0 && n % cfg.output.snapshot_every == 0)
            snapshot(s, fmt::format("step_{:08d}.mkg", n));
    }
    csv.close();
    if (!csv) throw IoError(fmt::format("failed writing '{}'", (dir / "trace.csv").string()));
    sum.final_state = s;

    write_estimates_sidecar(dir / "estimates.txt", c);
    if (cfg.output.plots) emit_plots(dir, sum.trace, c.J0);

    const DiagnosticsRecord& first = sum.trace.front();
    const DiagnosticsRecord& last = sum.trace.back();
    double drift = first.energy_E0 != 0.0 ? std::abs(last.energy_E0 - first.energy_E0) / std::abs(first.energy_E0)
                                          : std::abs(last.energy_E0);
    fmt::print(log, "energy E0: {:.12e} -> {:.12e} (relative drift {:.3e})\n", first.energy_E0, last.energy_E0, drift);

    bool uniform = cfg.output.csv_every == 1 || steps % cfg.output.csv_every == 0;
    if (sum.trace.size() < 3) {
        fmt::print(log, "Gronwall audit skipped: {} trace records, need at least 3\n", sum.trace.size());
    } else if (!uniform) {
        fmt::print(log, "Gronwall audit skipped: steps is not a multiple of csv_every\n");
    } else {
        sum.report = audit_gronwall(sum.trace, c);
        std::ofstream audit(dir / "audit.txt");
        audit << sum.report->text;
        const FittedConstants& f = sum.report->fits;
        fmt::print(log, "fitted constants: C_N = {:.6e}, C0 = {:.6e}, E1 exponent = {:.6e}\n", f.C_N_fit, f.C0_fit,
                   f.gronwall_fit);
    }
    return sum;
}

int check_geometry(const RunConfig& cfg, std::ostream& out) {
    const KahlerFamily& fam = cfg.model.kahler;
    int nc = cfg.model.n_scalar;
    std::mt19937_64 rng(cfg.seed);
    double r_hi = std::min(fam.r_max, 2.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0), rad(0.05, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        std::vector<cplx> phi(nc);
        double norm = 0.0;
        for (cplx& f : phi) {
            f = {u(rng), u(rng)};
            norm += std::norm(f);
        }
        double scale = r_hi * rad(rng) / std::sqrt(norm);
        for (cplx& f : phi) f *= scale;
        HermitianMatrixField g = kahler_metric(fam, phi);
        HermitianMatrixField h = hessian_oracle(fam, phi);
        double diff = 0.0, mag = 0.0;
        for (int a = 0; a < nc; ++a)
            for (int b = 0; b < nc; ++b) {
                diff = std::max(diff, std::abs(g(a, b) - h(a, b)));
                mag = std::max(mag, std::abs(h(a, b)));
            }
        worst = std::max(worst, diff / std::max(mag, 1e-300));
    }
    bool oracle_ok = worst < 1e-6;
    fmt::print(out, "metric vs Hessian oracle: max relative error {:.3e} over 100 points [{}]\n", worst,
               oracle_ok ? "ok" : "FAILED");
    fmt::print(out, "Q normalization: {}\n", describe_q_normalization());

    std::vector<double> radii = uniform_radii(2.0, 1000);
    std::vector<double> fit_radii = uniform_radii(r_hi, 1000);
    KahlerFamily fitted = fit_bound_constants(fam, fit_radii);
    Lemma1Report rep = lemma1_bound_check(fitted, radii);
    fmt::print(out, "fitted constants: b0 = {:.6e}, C1 = {:.6e}, C2 = {:.6e}, C3 = {:.6e}\n",
               fitted.b.empty() ? 0.0 : fitted.b[0], fitted.C1, fitted.C2, fitted.C3);
    fmt::print(out, "upper bound on |Phi(r)|: {} violations at {} radii in (0, 2]\n", rep.violations, radii.size());
    bool lower_ok = true;
    if (fam.lower_bound_configured) {
        lower_ok = rep.lower_violations == 0;
        fmt::print(out, "lower bound with c1 = {}, c2 = {}: {} violations\n", fam.c1, fam.c2, rep.lower_violations);
    } else {
        fmt::print(out, "lower bound not configured (set kahler.c1 and kahler.c2 to check it)\n");
    }
    bool ok = oracle_ok && rep.violations == 0 && lower_ok;
    fmt::print(out, "{}\n", ok ? "all geometry checks passed" : "geometry checks FAILED");
    return ok ? kExitOk : kExitCheckFailed;
}

int check_bounds(const std::filesystem::path& trace_path, std::ostream& out) {
    std::vector<DiagnosticsRecord> trace = read_trace_csv(trace_path);
    EstimateConstants c = read_estimates_sidecar(trace_path.parent_path() / "estimates.txt");
    GronwallReport rep;
    try {
        rep = audit_gronwall(trace, c);
    } catch (const TraceTooShort& e) {
        fmt::print(out, "check-bounds: {}\n", e.what());
        return kExitCheckFailed;
    } catch (const NonUniformSampling& e) {
        fmt::print(out, "check-bounds: {}\n", e.what());
        return kExitCheckFailed;
    }
    out << rep.text;
    bool ok = true;
    for (const FitSummary& f : rep.summaries) ok = ok && f.finite && f.stabilized;
    fmt::print(out, "fitted constants: C_N = {:.6e}, C0 = {:.6e}, E1 exponent = {:.6e}\n", rep.fits.C_N_fit,
               rep.fits.C0_fit, rep.fits.gronwall_fit);
    fmt::print(out, "{}\n", ok ? "all fits finite and stabilized" : "some fits are not stabilized");
    return ok ? kExitOk : kExitCheckFailed;
}

int kirchhoff_verify(const KirchhoffOptions& opt, std::ostream& out) {
    SphereQuadrature q = SphereQuadrature::product(opt.order);
    WaveField wave = WaveField::plane_wave({opt.k[0], opt.k[1], opt.k[2]});
    std::vector<SpacetimePoint> points{{0.0, {0.0, 0.0, 0.0}}, {0.7, {0.3, -0.2, 0.5}}, {2.0, {-1.0, 0.4, 0.1}}};
    std::vector<double> radii{0.5 * opt.r0, opt.r0};
    KirchhoffScan scan = kirchhoff_residual_scan(wave, points, radii, q);
    double kn = std::sqrt(opt.k[0] * opt.k[0] + opt.k[1] * opt.k[1] + opt.k[2] * opt.k[2]);
    fmt::print(out, "plane wave |k| = {:.6g}, quadrature order {} ({} nodes)\n", kn, opt.order, q.nodes.size());
    fmt::print(out, "{:>8} {:>8} {:>8} {:>8} {:>8} {:>16} {:>16} {:>12}\n", "t", "x", "y", "z", "r0", "lin", "exact",
               "residual");
    for (const KirchhoffEntry& e : scan.entries)
        fmt::print(out, "{:8.3f} {:8.3f} {:8.3f} {:8.3f} {:8.3f} {:16.10f} {:16.10f} {:12.3e}\n", e.p.t, e.p.x[0],
                   e.p.x[1], e.p.x[2], e.r0, e.value, e.exact, e.residual);
    double c_res = kirchhoff_residual_scan(WaveField::constant(1.5), points, radii, q).max_residual;
    double t_res = kirchhoff_residual_scan(WaveField::time_linear(), points, radii, q).max_residual;
    fmt::print(out, "max residual {:.3e}; constant field {:.3e}; u = t {:.3e}\n", scan.max_residual, c_res, t_res);
    bool ok = scan.max_residual < 1e-3 && c_res < 1e-12 && t_res < 1e-12;
    fmt::print(out, "{}\n", ok ? "Kirchhoff representation verified" : "Kirchhoff residual above 1e-3");
    return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace mkg

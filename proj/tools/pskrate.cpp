// pskrate: key-rate analysis for N-ary phase-shift-keyed coherent-state QKD over a
// lossy channel. Subcommands evaluate single operating points, sweep transmittance
// with per-point amplitude optimization, locate crossings between letter-count
// curves, trace postselection boundaries, and cross-check the chain by Monte Carlo.
//
// Exit codes: 0 success, 2 usage or invalid parameters, 3 numerical failure,
// 4 partial results (some rows carry an error marker).

#include "pskqkd/info.hpp"
#include "pskqkd/keyrate.hpp"
#include "pskqkd/montecarlo.hpp"
#include "pskqkd/parallel.hpp"
#include "pskqkd/sweep.hpp"
#include "pskqkd/version.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace {

using json = nlohmann::ordered_json;
using namespace pskqkd;

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

using MetaList = std::vector<std::pair<std::string, std::string>>;

void write_metadata(std::ostream& os, const std::string& command, const MetaList& extra) {
    os << "# version=" << kVersion << "\n# command=" << command << "\n";
    for (const auto& [k, v] : extra)
        os << "# " << k << "=" << v << "\n";
}

// Writes through to the given file, or stdout when the path is empty.
class OutputTarget {
  public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_)
                throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

struct GridOptions {
    int radial = 96;
    int angular = 64;
    double r_max = 0.0;
    double target = 1e-5;

    QuadratureGrid make() const { return {radial, angular, r_max, target}; }
    MetaList meta() const {
        return {{"radial_nodes", std::to_string(radial)},
                {"angular_nodes", std::to_string(angular)},
                {"r_max", r_max == 0.0 ? "auto" : fmt9(r_max)},
                {"convergence_target", fmt9(target)}};
    }
    json to_json() const {
        json j;
        j["radial_nodes"] = radial;
        j["angular_nodes"] = angular;
        j["r_max"] = r_max == 0.0 ? json("auto") : json(r_max);
        j["convergence_target"] = target;
        return j;
    }
};

void add_grid_options(CLI::App* cmd, GridOptions& g) {
    cmd->add_option("--radial-nodes", g.radial, "radial quadrature nodes per angular line")
        ->check(CLI::Range(32, 4096))
        ->capture_default_str();
    cmd->add_option("--angular-nodes", g.angular, "angular quadrature nodes per sector")
        ->check(CLI::Range(16, 4096))
        ->capture_default_str();
    cmd->add_option("--r-max", g.r_max, "truncation radius (0 = automatic)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--convergence-target", g.target, "quadrature convergence budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

struct AmpOptions {
    double lo = AmplitudeSearch{}.lo;
    double hi = AmplitudeSearch{}.hi;
    double step = AmplitudeSearch{}.step;
    double tol = AmplitudeSearch{}.tol;

    AmplitudeSearch make() const { return {lo, hi, step, tol}; }
    MetaList meta() const {
        return {{"amp_min", fmt9(lo)},
                {"amp_max", fmt9(hi)},
                {"amp_step", fmt9(step)},
                {"amp_tol", fmt9(tol)}};
    }
};

void add_amp_options(CLI::App* cmd, AmpOptions& a) {
    cmd->add_option("--amp-min", a.lo, "amplitude search lower bound")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--amp-max", a.hi, "amplitude search upper bound")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--amp-step", a.step, "amplitude coarse scan step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--amp-tol", a.tol, "amplitude refinement tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

std::string g_config_path; // shared by every subcommand; only one parses per run

void add_common_options(CLI::App* cmd, int& threads) {
    cmd->add_option("--threads", threads, "worker thread cap (0 = all hardware threads)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--config", g_config_path, "read options from a key=value file (flags win)");
}

// Config support is done by hand because the library only honors a config option on
// the root app, while our keys are flat per-subcommand names. Each file entry becomes
// a synthetic "--key=value" token appended after the real argv; entries whose flag was
// given explicitly are dropped, so the command line always wins.
std::vector<std::string> expand_config_args(std::vector<std::string> args) {
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty())
        return args;
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot read config file '" + path + "'");
    auto trim = [](const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line is not key=value: '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config")
            continue;
        const std::string flag = "--" + key;
        bool given = false;
        for (const std::string& a : args)
            given = given || a == flag || a.rfind(flag + "=", 0) == 0;
        if (!given)
            args.push_back(flag + "=" + value);
    }
    return args;
}

std::vector<double> expand_eta_range(const std::string& text) {
    double start = 0.0, stop = 0.0, step = 0.0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3)
        throw std::invalid_argument("--eta-range must be start:stop:step, got '" + text + "'");
    if (step <= 0.0 || stop < start)
        throw std::invalid_argument("--eta-range needs step > 0 and stop >= start");
    std::vector<double> etas;
    const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i)
        etas.push_back(start + i * step);
    return etas;
}

const char* mode_name(Reconciliation r) {
    return r == Reconciliation::direct ? "direct" : "reverse";
}

// One boundary CSV schema shared by `psa` and `keyrate --boundary-out`: the sampled
// sector is replicated around the full circle so the file plots the whole star.
// Rays that never reach the acceptance threshold get the literal marker `empty`.
void write_boundary_rows(std::ostream& os, double eta, const PostselectionBoundary& boundary) {
    const int n = boundary.params.letters;
    const double sector = 2.0 * std::numbers::pi / n;
    for (int s = 0; s < n; ++s)
        for (size_t i = 0; i < boundary.angles.size(); ++i) {
            os << fmt9(eta) << ',' << fmt9(boundary.angles[i] + s * sector) << ',';
            if (boundary.found[i])
                os << fmt9(boundary.radii[i]);
            else
                os << "empty";
            os << '\n';
        }
}

// ---------------------------------------------------------------------------
// keyrate

struct KeyrateArgs {
    int letters = 2;
    double amplitude = 1.0;
    double transmittance = 1.0;
    std::string reconciliation = "direct";
    std::string postselection = "on";
    bool check_convergence = false;
    GridOptions grid;
    int threads = 0;
    std::string out;
    std::string boundary_out;
};

int run_keyrate(const KeyrateArgs& a) {
    set_max_threads(a.threads);
    const ProtocolParams params{a.letters, a.amplitude, a.transmittance};
    params.validate();
    const QuadratureGrid grid = a.grid.make();
    grid.validate();
    const Reconciliation mode =
        a.reconciliation == "direct" ? Reconciliation::direct : Reconciliation::reverse;
    const bool postselect = a.postselection == "on";

    KeyRateResult result = mode == Reconciliation::direct
                               ? keyrate_direct(params, grid, postselect)
                               : keyrate_reverse(params, grid, postselect);
    if (a.check_convergence)
        result = with_convergence_check(result, params, grid);
    const double presented = std::max(result.rate, 0.0);

    std::cout << "key-rate point (version " << kVersion << ")\n"
              << "  letters            " << a.letters << "\n"
              << "  amplitude          " << fmt9(a.amplitude) << "\n"
              << "  transmittance      " << fmt9(a.transmittance) << "\n"
              << "  reconciliation     " << a.reconciliation << "\n"
              << "  postselection      " << a.postselection << "\n"
              << "  grid               " << a.grid.radial << " x " << a.grid.angular
              << ", r_max " << fmt9(result.r_max) << "\n"
              << "  rate               " << fmt9(presented) << "\n"
              << "  raw rate           " << fmt9(result.rate) << "\n"
              << "  I_AB               " << fmt9(result.iab) << "\n"
              << (mode == Reconciliation::direct ? "  I_AE               " : "  mean I_BE          ")
              << fmt9(result.eve_information) << "\n"
              << "  accepted fraction  " << fmt9(result.accepted_fraction) << "\n";
    if (a.check_convergence)
        std::cout << "  half-step delta    " << fmt9(result.achieved_delta) << "\n";

    if (!a.out.empty()) {
        json doc;
        doc["version"] = kVersion;
        doc["command"] = "keyrate";
        json cfg;
        cfg["letters"] = a.letters;
        cfg["amplitude"] = a.amplitude;
        cfg["transmittance"] = a.transmittance;
        cfg["reconciliation"] = a.reconciliation;
        cfg["postselection"] = a.postselection;
        cfg["grid"] = a.grid.to_json();
        cfg["threads"] = a.threads;
        doc["config"] = cfg;
        json res;
        res["rate"] = presented;
        res["raw_rate"] = result.rate;
        res["iab"] = result.iab;
        res["eve_information"] = result.eve_information;
        res["accepted_fraction"] = result.accepted_fraction;
        res["r_max"] = result.r_max;
        if (a.check_convergence)
            res["half_step_delta"] = result.achieved_delta;
        doc["result"] = res;
        OutputTarget target(a.out);
        target.stream() << doc.dump(2) << '\n';
    }

    if (!a.boundary_out.empty()) {
        const PostselectionBoundary boundary = psa_boundary(params, grid);
        OutputTarget target(a.boundary_out);
        MetaList meta{{"letters", std::to_string(a.letters)},
                      {"amplitude", fmt9(a.amplitude)},
                      {"eta_list", fmt9(a.transmittance)}};
        auto gm = a.grid.meta();
        meta.insert(meta.end(), gm.begin(), gm.end());
        write_metadata(target.stream(), "keyrate --boundary-out", meta);
        target.stream() << "eta,theta,r_star\n";
        write_boundary_rows(target.stream(), a.transmittance, boundary);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
    std::vector<int> letters;
    std::string eta_range;
    std::string reconciliation = "direct";
    std::string postselection = "on";
    GridOptions grid;
    AmpOptions amp;
    int threads = 0;
    std::string out;
};

int run_sweep(const SweepArgs& a) {
    set_max_threads(a.threads);
    const QuadratureGrid grid = a.grid.make();
    grid.validate();
    const std::vector<double> etas = expand_eta_range(a.eta_range);
    const RateMode mode{a.reconciliation == "direct" ? Reconciliation::direct
                                                     : Reconciliation::reverse,
                        a.postselection == "on"};

    OutputTarget target(a.out);
    std::ostream& os = target.stream();
    std::string letters_list;
    for (size_t i = 0; i < a.letters.size(); ++i)
        letters_list += (i ? "," : "") + std::to_string(a.letters[i]);
    MetaList meta{{"letters", letters_list},
                  {"eta_range", a.eta_range},
                  {"reconciliation", a.reconciliation},
                  {"postselection", a.postselection},
                  {"threads", std::to_string(a.threads)}};
    auto gm = a.grid.meta();
    meta.insert(meta.end(), gm.begin(), gm.end());
    auto am = a.amp.meta();
    meta.insert(meta.end(), am.begin(), am.end());
    write_metadata(os, "sweep", meta);
    os << "eta,letters,mode,postselection,a_opt,rate,accepted_fraction,error\n";

    bool partial = false;
    for (int n : a.letters) {
        const std::vector<SweepPoint> points = sweep_eta(n, mode, etas, grid, a.amp.make());
        for (const SweepPoint& p : points) {
            os << fmt9(p.eta) << ',' << n << ',' << mode_name(mode.reconciliation) << ','
               << (mode.postselected ? "on" : "off") << ',';
            if (!p.error.empty()) {
                partial = true;
                os << ",,," << csv_field(p.error) << '\n';
                continue;
            }
            os << (std::isnan(p.optimal_amplitude) ? "" : fmt9(p.optimal_amplitude)) << ','
               << fmt9(p.rate) << ',' << fmt9(p.accepted_fraction) << ",\n";
        }
    }
    return partial ? 4 : 0;
}

// ---------------------------------------------------------------------------
// crossings

struct CrossingsArgs {
    std::vector<std::string> pairs;
    std::vector<int> consecutive;
    std::string reconciliation = "direct";
    std::string postselection = "on";
    double eta_min = 0.05;
    double eta_max = 0.95;
    GridOptions grid;
    AmpOptions amp;
    int threads = 0;
    std::string out;
};

int run_crossings(const CrossingsArgs& a) {
    set_max_threads(a.threads);
    const QuadratureGrid grid = a.grid.make();
    grid.validate();
    const RateMode mode{a.reconciliation == "direct" ? Reconciliation::direct
                                                     : Reconciliation::reverse,
                        a.postselection == "on"};

    std::vector<std::pair<int, int>> pairs;
    for (const std::string& token : a.pairs) {
        int lo = 0, hi = 0;
        if (std::sscanf(token.c_str(), "%d:%d", &lo, &hi) != 2)
            throw std::invalid_argument("--pairs entries must be nLow:nHigh, got '" + token + "'");
        pairs.emplace_back(lo, hi);
    }
    if (!a.consecutive.empty()) {
        if (a.consecutive.size() != 2 || a.consecutive[0] >= a.consecutive[1])
            throw std::invalid_argument("--consecutive takes two letter counts lo < hi");
        for (int n = a.consecutive[0]; n < a.consecutive[1]; ++n)
            pairs.emplace_back(n, n + 1);
    }
    if (pairs.empty())
        throw std::invalid_argument("no pairs given: use --pairs or --consecutive");

    struct Row {
        std::pair<int, int> pair;
        CrossingRecord record;
        std::string error;
    };
    std::vector<Row> rows;
    bool partial = false;
    for (const auto& pr : pairs) {
        Row row{pr, {}, {}};
        try {
            row.record =
                find_crossing(pr.first, pr.second, mode, {a.eta_min, a.eta_max}, grid, a.amp.make());
        } catch (const std::exception& e) {
            row.error = e.what();
            partial = true;
        }
        rows.push_back(std::move(row));
    }

    std::printf("crossing search (%s reconciliation, postselection %s, version %s)\n",
                a.reconciliation.c_str(), a.postselection.c_str(), kVersion);
    std::printf("%6s %6s %14s %14s %14s %14s\n", "n_low", "n_high", "eta_star",
                "bracket_width", "gap_low", "gap_high");
    for (const Row& row : rows) {
        if (row.error.empty())
            std::printf("%6d %6d %14s %14s %14s %14s\n", row.pair.first, row.pair.second,
                        fmt9(row.record.eta_star).c_str(), fmt9(row.record.bracket_width).c_str(),
                        fmt9(row.record.gap_low).c_str(), fmt9(row.record.gap_high).c_str());
        else
            std::printf("%6d %6d   unbracketed: %s\n", row.pair.first, row.pair.second,
                        row.error.c_str());
    }

    if (!a.out.empty()) {
        OutputTarget target(a.out);
        std::ostream& os = target.stream();
        std::string pair_list;
        for (size_t i = 0; i < pairs.size(); ++i)
            pair_list += (i ? "," : "") + std::to_string(pairs[i].first) + ":" +
                         std::to_string(pairs[i].second);
        MetaList meta{{"pairs", pair_list},
                      {"reconciliation", a.reconciliation},
                      {"postselection", a.postselection},
                      {"eta_bracket", fmt9(a.eta_min) + ":" + fmt9(a.eta_max)},
                      {"threads", std::to_string(a.threads)}};
        auto gm = a.grid.meta();
        meta.insert(meta.end(), gm.begin(), gm.end());
        auto am = a.amp.meta();
        meta.insert(meta.end(), am.begin(), am.end());
        write_metadata(os, "crossings", meta);
        os << "n_low,n_high,eta_star,bracket_width,gap_low,gap_high,error\n";
        for (const Row& row : rows) {
            os << row.pair.first << ',' << row.pair.second << ',';
            if (row.error.empty())
                os << fmt9(row.record.eta_star) << ',' << fmt9(row.record.bracket_width) << ','
                   << fmt9(row.record.gap_low) << ',' << fmt9(row.record.gap_high) << ',';
            else
                os << ",,,," << csv_field(row.error);
            os << '\n';
        }
    }
    return partial ? 4 : 0;
}

// ---------------------------------------------------------------------------
// psa

struct PsaArgs {
    int letters = 2;
    double amplitude = 1.0;
    std::vector<double> eta_list;
    GridOptions grid;
    int threads = 0;
    std::string out;
};

int run_psa(const PsaArgs& a) {
    set_max_threads(a.threads);
    const QuadratureGrid grid = a.grid.make();
    grid.validate();
    OutputTarget target(a.out);
    std::ostream& os = target.stream();
    std::string eta_list;
    for (size_t i = 0; i < a.eta_list.size(); ++i)
        eta_list += (i ? "," : "") + fmt9(a.eta_list[i]);
    MetaList meta{{"letters", std::to_string(a.letters)},
                  {"amplitude", fmt9(a.amplitude)},
                  {"eta_list", eta_list},
                  {"threads", std::to_string(a.threads)}};
    auto gm = a.grid.meta();
    meta.insert(meta.end(), gm.begin(), gm.end());
    write_metadata(os, "psa", meta);
    os << "eta,theta,r_star\n";
    for (double eta : a.eta_list) {
        const ProtocolParams params{a.letters, a.amplitude, eta};
        params.validate();
        write_boundary_rows(os, eta, psa_boundary(params, grid));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    int letters = 2;
    double amplitude = 1.0;
    double transmittance = 1.0;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    std::string postselection = "off";
    GridOptions grid;
    int threads = 0;
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    set_max_threads(a.threads);
    const ProtocolParams params{a.letters, a.amplitude, a.transmittance};
    params.validate();
    const QuadratureGrid grid = a.grid.make();
    grid.validate();
    const bool select = a.postselection == "on";

    SimulationConfig config{params, a.samples, a.seed,
                            select ? McPostselection::direct_psa : McPostselection::off};
    const SimulationReport report = simulate(config);

    // Analytic references for the comparison columns. The plug-in mutual information
    // from the confusion matrix estimates the decoded-letter channel, so it is
    // z-scored against the decoded-channel analytics; the continuous-outcome
    // iab_total is reported alongside as the upper reference it must stay below.
    const double dec_err = decoded_channel_error(params);
    const double dec_info = decoded_channel_information(params);
    const double iab_quad = iab_total(params, grid);
    const double nd = static_cast<double>(a.samples);
    const double err_se = std::sqrt(std::max(dec_err * (1.0 - dec_err), 0.0) / nd);
    const double err_z =
        err_se > 0.0 ? (report.symbol_error_rate - dec_err) / err_se : 0.0;
    const double info_z = report.iab_standard_error > 0.0
                              ? (report.empirical_iab - dec_info) / report.iab_standard_error
                              : 0.0;

    json doc;
    doc["version"] = kVersion;
    doc["command"] = "simulate";
    json cfg;
    cfg["letters"] = a.letters;
    cfg["amplitude"] = a.amplitude;
    cfg["transmittance"] = a.transmittance;
    cfg["samples"] = a.samples;
    cfg["seed"] = a.seed;
    cfg["postselection"] = a.postselection;
    cfg["grid"] = a.grid.to_json();
    cfg["threads"] = a.threads;
    doc["config"] = cfg;

    json res;
    res["samples"] = report.samples;
    res["letters"] = report.letters;
    res["symbol_error_rate"] = report.symbol_error_rate;
    res["empirical_iab"] = report.empirical_iab;
    res["iab_standard_error"] = report.iab_standard_error;
    res["accepted"] = report.accepted;
    res["accepted_fraction"] = report.accepted_fraction;
    json confusion = json::array();
    for (int k = 0; k < report.letters; ++k) {
        json row = json::array();
        for (int l = 0; l < report.letters; ++l)
            row.push_back(report.confusion[static_cast<size_t>(k) * report.letters + l]);
        confusion.push_back(row);
    }
    res["confusion"] = confusion;
    doc["result"] = res;

    json analytic;
    analytic["decoded_error_rate"] = dec_err;
    analytic["decoded_information"] = dec_info;
    analytic["iab_quadrature"] = iab_quad;
    json comparison;
    comparison["error_rate_z"] = err_z;
    comparison["information_z"] = info_z;
    comparison["iab_lower_bound_satisfied"] =
        report.empirical_iab <= iab_quad + 3.0 * report.iab_standard_error;
    if (select) {
        const double acc_quad = keyrate_direct(params, grid, true).accepted_fraction;
        analytic["accepted_fraction_quadrature"] = acc_quad;
        const double acc_se = std::sqrt(std::max(acc_quad * (1.0 - acc_quad), 0.0) / nd);
        comparison["accepted_fraction_z"] =
            acc_se > 0.0 ? (report.accepted_fraction - acc_quad) / acc_se : 0.0;
    }
    doc["analytic"] = analytic;
    doc["comparison"] = comparison;

    std::cout << doc.dump(2) << '\n';
    if (!a.out.empty()) {
        OutputTarget target(a.out);
        target.stream() << doc.dump(2) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"key-rate analysis for phase-shift-keyed coherent-state QKD"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pskqkd::kVersion));

    KeyrateArgs ka;
    CLI::App* keyrate = app.add_subcommand("keyrate", "evaluate one operating point");
    keyrate->add_option("--letters", ka.letters, "alphabet size N")->required()->check(CLI::Range(2, 4096));
    keyrate->add_option("--amplitude", ka.amplitude, "letter amplitude a")->required()->check(CLI::NonNegativeNumber);
    keyrate->add_option("--transmittance", ka.transmittance, "channel transmittance eta")->required()->check(CLI::Range(0.0, 1.0));
    keyrate->add_option("--reconciliation", ka.reconciliation, "direct or reverse")
        ->check(CLI::IsMember({"direct", "reverse"}))
        ->capture_default_str();
    keyrate->add_option("--postselection", ka.postselection, "on or off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    keyrate->add_flag("--check-convergence", ka.check_convergence,
                      "re-evaluate on a half-step grid and report the delta");
    keyrate->add_option("--out", ka.out, "write the report as JSON to this path");
    keyrate->add_option("--boundary-out", ka.boundary_out,
                        "write the postselection boundary CSV to this path");
    add_grid_options(keyrate, ka.grid);
    add_common_options(keyrate, ka.threads);

    SweepArgs sa;
    CLI::App* sweep = app.add_subcommand("sweep", "amplitude-optimized rate vs transmittance");
    sweep->add_option("--letters", sa.letters, "alphabet sizes (comma separated)")
        ->required()
        ->delimiter(',');
    sweep->add_option("--eta-range", sa.eta_range, "transmittance grid start:stop:step")->required();
    sweep->add_option("--reconciliation", sa.reconciliation, "direct or reverse")
        ->check(CLI::IsMember({"direct", "reverse"}))
        ->capture_default_str();
    sweep->add_option("--postselection", sa.postselection, "on or off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    sweep->add_option("--out", sa.out, "write CSV here instead of stdout");
    add_grid_options(sweep, sa.grid);
    add_amp_options(sweep, sa.amp);
    add_common_options(sweep, sa.threads);

    CrossingsArgs ca;
    CLI::App* crossings = app.add_subcommand("crossings", "transmittance where rate curves cross");
    crossings->add_option("--pairs", ca.pairs, "letter-count pairs nLow:nHigh (comma separated)")
        ->delimiter(',');
    crossings->add_option("--consecutive", ca.consecutive,
                          "expand to all consecutive pairs between two letter counts")
        ->expected(2);
    crossings->add_option("--reconciliation", ca.reconciliation, "direct or reverse")
        ->check(CLI::IsMember({"direct", "reverse"}))
        ->capture_default_str();
    crossings->add_option("--postselection", ca.postselection, "on or off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    crossings->add_option("--eta-min", ca.eta_min, "bracket lower end")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    crossings->add_option("--eta-max", ca.eta_max, "bracket upper end")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    crossings->add_option("--out", ca.out, "also write the table as CSV to this path");
    add_grid_options(crossings, ca.grid);
    add_amp_options(crossings, ca.amp);
    add_common_options(crossings, ca.threads);

    PsaArgs pa;
    CLI::App* psa = app.add_subcommand("psa", "postselection boundary radii over one sector");
    psa->add_option("--letters", pa.letters, "alphabet size N")->required()->check(CLI::Range(2, 4096));
    psa->add_option("--amplitude", pa.amplitude, "letter amplitude a")->required()->check(CLI::NonNegativeNumber);
    psa->add_option("--eta-list", pa.eta_list, "transmittance values (comma separated)")
        ->required()
        ->delimiter(',');
    psa->add_option("--out", pa.out, "write CSV here instead of stdout");
    add_grid_options(psa, pa.grid);
    add_common_options(psa, pa.threads);

    SimulateArgs ma;
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo run of the protocol chain");
    simulate_cmd->add_option("--letters", ma.letters, "alphabet size N")->required()->check(CLI::Range(2, 4096));
    simulate_cmd->add_option("--amplitude", ma.amplitude, "letter amplitude a")->required()->check(CLI::NonNegativeNumber);
    simulate_cmd->add_option("--transmittance", ma.transmittance, "channel transmittance eta")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    simulate_cmd->add_option("--samples", ma.samples, "number of transmissions")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate_cmd->add_option("--seed", ma.seed, "random seed")->capture_default_str();
    simulate_cmd->add_option("--postselection", ma.postselection,
                             "on = count acceptance-region hits")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    simulate_cmd->add_option("--out", ma.out, "also write the JSON report to this path");
    add_grid_options(simulate_cmd, ma.grid);
    add_common_options(simulate_cmd, ma.threads);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config_args(std::move(args));
        std::reverse(args.begin(), args.end()); // parse(vector) consumes back to front
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*keyrate)
            return run_keyrate(ka);
        if (*sweep)
            return run_sweep(sa);
        if (*crossings)
            return run_crossings(ca);
        if (*psa)
            return run_psa(pa);
        if (*simulate_cmd)
            return run_simulate(ma);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}

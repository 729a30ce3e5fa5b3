#include "nsa/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "nsa/bump.hpp"
#include "nsa/eigensolve.hpp"
#include "nsa/error.hpp"
#include "nsa/ltreport.hpp"

namespace nsa::cli {

namespace {

using json = nlohmann::ordered_json;
using construct::ConstructionLedger;
using construct::Domain;
using construct::LedgerEntry;
using cplx = std::complex<double>;

json pair(cplx z) { return json::array({z.real(), z.imag()}); }

cplx get_cplx(const json& j) {
    if (!j.is_array() || j.size() != 2) throw InvalidLedger("complex number must be a [re, im] pair");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

std::shared_ptr<spdlog::logger> logger() {
    static auto log = [] {
        auto l = spdlog::stderr_color_mt("nsaccum");
        l->set_pattern("[%l] %v");
        const char* env = std::getenv("NSACCUM_LOG_LEVEL");
        l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
        return l;
    }();
    return log;
}

struct Invalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Invalid(what);
}

std::string fmt17(double x) { return fmt::format("{:.17g}", x); }

// ---- bump ---------------------------------------------------------------

struct BumpArgs {
    int dim = 1;
    double p = 2.0;
    double lambda = 1.0;
    double eps = 0.5;
    double delta = 0.5;
    double r = 0.05;
    long long m_cap = bump::DesignOptions{}.m_cap;
};

int cmd_bump(const BumpArgs& a) {
    require(a.dim >= 1, "--dim must be a positive integer");
    require(a.p > a.dim, "--p must exceed --dim (the bump tail is only in L^p for p > d)");
    require(a.lambda > 0.0 && std::isfinite(a.lambda), "--lambda must lie in (0, inf)");
    require(a.eps > 0.0 && a.delta > 0.0 && a.r > 0.0, "--eps, --delta and --r must be positive");
    require(a.m_cap >= 0, "--m-cap must be non-negative");
    bump::DesignOptions opt;
    opt.m_cap = a.m_cap;
    const auto b = bump::design_bump(a.dim, a.p, a.lambda, a.eps, a.delta, a.r, opt);
    const eigensolve::SecularProblem prob{b.d, b.c, b.a, b.tau};
    json out;
    out["d"] = b.d;
    out["p"] = a.p;
    out["lambda"] = b.lambda;
    out["nu"] = b.nu;
    out["m_index"] = b.m;
    out["a"] = b.a;
    out["eta"] = b.eta;
    out["tau"] = pair(b.tau);
    out["k"] = pair(b.k);
    out["c"] = pair(b.c);
    out["mu"] = pair(b.mu);
    out["norm_p"] = bump::norm_p(b, a.p);
    out["norm_inf"] = bump::norm_inf(b);
    out["secular_residual"] = std::abs(eigensolve::secular_residual(prob, b.k));
    std::cout << out.dump(2) << "\n";
    return kOk;
}

// ---- construct ----------------------------------------------------------

struct ConstructArgs {
    int dim = 1;
    double p = 1.5;
    double budget = 1.0;
    long long steps = 5;
    std::string domain = "whole";
    std::optional<double> phi;
    std::string out;
    std::string targets = "enumeration";
    long long m_cap = bump::DesignOptions{}.m_cap;
};

int cmd_construct(const ConstructArgs& a) {
    require(a.dim >= 1, "--dim must be a positive integer");
    require(a.p > a.dim, "--p must exceed --dim (the bump tail is only in L^p for p > d)");
    require(a.budget > 0.0 && std::isfinite(a.budget), "--budget must be positive");
    require(a.steps >= 0, "--steps must be non-negative");
    require(a.domain == "whole" || a.domain == "robin", "--domain must be whole or robin");
    require(a.phi.has_value() == (a.domain == "robin"), "--phi is required with --domain robin and only then");
    if (a.phi) require(*a.phi >= 0.0 && *a.phi < std::numbers::pi, "--phi must lie in [0, pi)");
    require(a.domain == "whole" || a.dim == 1, "--domain robin is only supported with --dim 1");
    require(a.m_cap >= 0, "--m-cap must be non-negative");

    construct::BuildOptions opt;
    try {
        opt.targets = construct::target_mode_from_string(a.targets);
    } catch (const InvalidArgument& e) {
        throw Invalid(e.what());
    }
    opt.design.m_cap = a.m_cap;
    const Domain domain = a.phi ? Domain::robin(*a.phi) : Domain::whole();

    auto log = logger();
    log->info("building {} step(s): d={} p={} budget={} domain={}", a.steps, a.dim, a.p, a.budget, a.domain);
    const auto ledger = construct::build(a.dim, a.p, a.budget, a.steps, domain, opt);
    for (const auto& e : ledger.entries) {
        log->info("n={} q={}/{} m={} lambda=({}, {}) gamma={}{} verified={}", e.n, e.target.num, e.target.den,
                  e.target.m, e.lambda.real(), e.lambda.imag(), e.gamma, e.gamma_fallback ? " (fallback)" : "",
                  e.verified);
    }
    if (a.out.empty()) {
        std::cout << serialize(ledger);
    } else {
        save_ledger(ledger, a.out);
    }
    if (ledger.failed_at) {
        log->error("construction stopped at step {}: {}", *ledger.failed_at, ledger.failure);
        return kPartial;
    }
    if (!ledger.failure.empty()) {
        log->error("{}", ledger.failure);
        return kVerification;
    }
    if (ledger.d != 1 && !ledger.entries.empty()) {
        log->warn("d = {}: entries are standalone-verified only (separation heuristic)", ledger.d);
    }
    return kOk;
}

// ---- verify -------------------------------------------------------------

int cmd_verify(const std::string& path, const std::string& oracle) {
    require(oracle == "transfer" || oracle == "grid", "--oracle must be transfer or grid");
    const auto ledger = load_ledger(path);
    auto log = logger();
    if (ledger.entries.empty()) {
        std::cout << "verify: empty ledger, nothing to check\n";
        return kOk;
    }
    if (ledger.d != 1) {
        std::cout << "verify: no multi-bump oracle for d = " << ledger.d << "\n";
        return kVerification;
    }
    const auto full = construct::step_potential(ledger);
    double max_dev = 0.0;
    int failures = 0;
    for (const auto& e : ledger.entries) {
        auto pot = full;
        pot.match_at = e.t + e.bump.a;
        std::optional<cplx> found;
        double tol = 1e-10 * (1.0 + std::abs(e.lambda));
        std::string why;
        try {
            if (oracle == "transfer") {
                found = eigensolve::transfer_eigen_1d(pot, construct::wavenumber_of(e.lambda)).mu;
            } else {
                const double radius = (e.lambda.real() >= 0.0 ? std::abs(e.lambda.imag()) : std::abs(e.lambda)) / 2.0;
                const auto roots = eigensolve::grid_oracle_1d(pot, e.lambda, radius);
                double best = std::numeric_limits<double>::infinity();
                for (const auto& r : roots) {
                    if (std::abs(r.mu - e.lambda) < best) {
                        best = std::abs(r.mu - e.lambda);
                        found = r.mu;
                        tol = 1e-8 + r.error_estimate;
                    }
                }
                if (!found) why = "no grid eigenvalue near the recorded one";
            }
        } catch (const Error& err) {
            why = err.what();
        }
        bool ok = found.has_value();
        double dev = std::numeric_limits<double>::infinity();
        if (ok) {
            dev = std::abs(*found - e.lambda);
            max_dev = std::max(max_dev, dev);
            if (!(dev <= tol)) {
                ok = false;
                why = fmt::format("deviation {:.3e} exceeds tolerance {:.3e}", dev, tol);
            } else if (!(found->imag() < 0.0) ||
                       !(std::abs(*found - e.target.q()) < 1.0 / static_cast<double>(e.target.m))) {
                ok = false;
                why = "capture contract violated";
            }
        }
        if (!ok) {
            ++failures;
            std::cout << "verify: entry " << e.n << " FAILED (" << oracle << "): " << why << "\n";
        } else {
            log->debug("entry {} ok, deviation {}", e.n, dev);
        }
    }
    std::cout << "verify: " << ledger.entries.size() - failures << "/" << ledger.entries.size()
              << " entries confirmed by the " << oracle << " oracle, max deviation " << fmt::format("{:.3e}", max_dev)
              << "\n";
    return failures == 0 ? kOk : kVerification;
}

// ---- report -------------------------------------------------------------

int cmd_report(const std::string& path, const std::string& out_dir) {
    const auto ledger = load_ledger(path);
    std::filesystem::create_directories(out_dir);
    std::vector<ltreport::CloudRow> cloud;
    try {
        cloud = ltreport::emit_cloud(ledger);
    } catch (const InvalidLedger& e) {
        logger()->error("{}", e.what());
        return kVerification;
    }
    const auto norms = ltreport::norm_budget_check(ledger);

    std::ofstream ec(std::filesystem::path(out_dir) / "eigencloud.csv");
    ec << "n,q_num,q_den,m_n,lambda_re,lambda_im,dist_to_target,capture_radius,lt_partial_sum\n";
    for (const auto& r : cloud) {
        ec << r.n << ',' << r.q_num << ',' << r.q_den << ',' << r.m << ',' << fmt17(r.lambda.real()) << ','
           << fmt17(r.lambda.imag()) << ',' << fmt17(r.dist_to_target) << ',' << fmt17(r.capture_radius) << ','
           << fmt17(r.lt_partial_sum) << '\n';
    }
    std::ofstream nc(std::filesystem::path(out_dir) / "norms.csv");
    nc << "N_prefix,norm_p,norm_inf,budget,margin\n";
    for (const auto& r : norms.rows) {
        nc << r.prefix << ',' << fmt17(r.norm_p) << ',' << fmt17(r.norm_inf) << ',' << fmt17(r.budget) << ','
           << fmt17(r.margin) << '\n';
    }
    if (!ec || !nc) throw std::runtime_error("report: could not write CSV files to " + out_dir);
    std::cout << "report: wrote " << cloud.size() << " eigenvalue row(s) and " << norms.rows.size()
              << " norm row(s) to " << out_dir << "\n";
    return kOk;
}

}  // namespace

// ---- ledger serialization -----------------------------------------------

json ledger_to_json(const ConstructionLedger& ledger) {
    json doc;
    doc["version"] = kLedgerVersion;
    json cfg;
    cfg["dim"] = ledger.d;
    cfg["p"] = ledger.p;
    cfg["budget"] = ledger.E;
    cfg["domain"] = ledger.domain.kind == Domain::Kind::robin ? "robin" : "whole";
    cfg["phi"] = ledger.domain.kind == Domain::Kind::robin ? json(ledger.domain.phi) : json(nullptr);
    cfg["steps"] = ledger.steps;
    cfg["targets"] = construct::to_string(ledger.targets);
    cfg["m_cap"] = ledger.m_cap;
    doc["config"] = cfg;
    json entries = json::array();
    for (const auto& e : ledger.entries) {
        json j;
        j["n"] = e.n;
        j["q"] = json::array({e.target.num, e.target.den});
        j["m"] = e.target.m;
        j["eps"] = e.eps;
        j["delta"] = e.delta;
        j["r"] = e.r;
        json b;
        b["m_index"] = e.bump.m;
        b["a"] = e.bump.a;
        b["eta"] = e.bump.eta;
        b["k"] = pair(e.bump.k);
        b["c"] = pair(e.bump.c);
        b["mu"] = pair(e.bump.mu);
        j["bump"] = b;
        j["t"] = e.t;
        j["mu"] = pair(e.mu);
        j["gamma"] = e.gamma;
        j["gamma_fallback"] = e.gamma_fallback;
        j["lambda"] = pair(e.lambda);
        j["residual"] = e.residual;
        j["verified"] = e.verified;
        j["capture"] = json{{"lambda_mu", e.dist_lambda_mu}, {"mu_q", e.dist_mu_q}};
        entries.push_back(j);
    }
    doc["entries"] = entries;
    if (ledger.failed_at) doc["failed_at"] = *ledger.failed_at;
    if (!ledger.failure.empty()) doc["failure"] = ledger.failure;
    return doc;
}

ConstructionLedger ledger_from_json(const json& doc) {
    try {
        if (doc.at("version").get<int>() != kLedgerVersion) throw InvalidLedger("unsupported ledger version");
        ConstructionLedger L;
        const auto& cfg = doc.at("config");
        L.d = cfg.at("dim").get<int>();
        L.p = cfg.at("p").get<double>();
        L.E = cfg.at("budget").get<double>();
        const auto domain = cfg.at("domain").get<std::string>();
        if (domain == "robin") {
            L.domain = Domain::robin(cfg.at("phi").get<double>());
        } else if (domain == "whole") {
            L.domain = Domain::whole();
        } else {
            throw InvalidLedger("unknown domain '" + domain + "'");
        }
        L.steps = cfg.at("steps").get<long long>();
        L.targets = construct::target_mode_from_string(cfg.at("targets").get<std::string>());
        L.m_cap = cfg.at("m_cap").get<long long>();
        for (const auto& j : doc.at("entries")) {
            LedgerEntry e;
            e.n = j.at("n").get<long long>();
            e.target.num = j.at("q").at(0).get<long long>();
            e.target.den = j.at("q").at(1).get<long long>();
            e.target.m = j.at("m").get<long long>();
            e.eps = j.at("eps").get<double>();
            e.delta = j.at("delta").get<double>();
            e.r = j.at("r").get<double>();
            const auto& b = j.at("bump");
            e.bump.d = L.d;
            e.bump.lambda = e.target.q();
            e.bump.nu = std::sqrt(e.bump.lambda);
            e.bump.m = b.at("m_index").get<long long>();
            e.bump.a = b.at("a").get<double>();
            e.bump.eta = b.at("eta").get<double>();
            e.bump.tau = {e.bump.nu, e.bump.eta};
            e.bump.k = get_cplx(b.at("k"));
            e.bump.c = get_cplx(b.at("c"));
            e.bump.mu = get_cplx(b.at("mu"));
            e.t = j.at("t").get<double>();
            e.mu = get_cplx(j.at("mu"));
            e.gamma = j.at("gamma").get<double>();
            e.gamma_fallback = j.at("gamma_fallback").get<bool>();
            e.lambda = get_cplx(j.at("lambda"));
            e.residual = j.at("residual").get<double>();
            e.verified = j.at("verified").get<bool>();
            e.dist_lambda_mu = j.at("capture").at("lambda_mu").get<double>();
            e.dist_mu_q = j.at("capture").at("mu_q").get<double>();
            L.entries.push_back(e);
        }
        if (doc.contains("failed_at")) L.failed_at = doc.at("failed_at").get<long long>();
        if (doc.contains("failure")) L.failure = doc.at("failure").get<std::string>();
        return L;
    } catch (const json::exception& e) {
        throw InvalidLedger(std::string("ledger schema mismatch: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidLedger(std::string("ledger schema mismatch: ") + e.what());
    }
}

std::string serialize(const ConstructionLedger& ledger) { return ledger_to_json(ledger).dump(2) + "\n"; }

ConstructionLedger parse(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidLedger(std::string("ledger is not valid JSON: ") + e.what());
    }
    return ledger_from_json(doc);
}

ConstructionLedger load_ledger(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidLedger("cannot open ledger file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void save_ledger(const ConstructionLedger& ledger, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << serialize(ledger);
    if (!out) throw std::runtime_error("cannot write ledger file '" + path + "'");
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Eigenvalue accumulation for complex Schrodinger potentials"};
    app.require_subcommand(1);

    BumpArgs ba;
    auto* bump_cmd = app.add_subcommand("bump", "Design one radial bump and print its parameters as JSON");
    bump_cmd->add_option("--dim", ba.dim, "Dimension d")->required();
    bump_cmd->add_option("--p", ba.p, "Exponent p > d")->required();
    bump_cmd->add_option("--lambda", ba.lambda, "Target energy")->required();
    bump_cmd->add_option("--eps", ba.eps, "L^p budget")->required();
    bump_cmd->add_option("--delta", ba.delta, "L^inf budget")->required();
    bump_cmd->add_option("--r", ba.r, "Eigenvalue tolerance")->required();
    bump_cmd->add_option("--m-cap", ba.m_cap, "Largest radius index searched");

    ConstructArgs ca;
    double phi = 0.0;
    auto* con_cmd = app.add_subcommand("construct", "Run the inductive construction and write a ledger");
    con_cmd->add_option("--dim", ca.dim, "Dimension d")->required();
    con_cmd->add_option("--p", ca.p, "Exponent p > d")->required();
    con_cmd->add_option("--budget", ca.budget, "Total norm budget E")->required();
    con_cmd->add_option("--steps", ca.steps, "Number of bumps N")->required();
    con_cmd->add_option("--domain", ca.domain, "whole or robin");
    auto* phi_opt = con_cmd->add_option("--phi", phi, "Robin angle in [0, pi)");
    con_cmd->add_option("--out", ca.out, "Ledger path (stdout when omitted)");
    con_cmd->add_option("--targets", ca.targets, "enumeration or integers");
    con_cmd->add_option("--m-cap", ca.m_cap, "Largest radius index searched per bump");

    std::string ledger_path, oracle = "transfer", out_dir = ".";
    auto* ver_cmd = app.add_subcommand("verify", "Re-locate every eigenvalue of a ledger");
    ver_cmd->add_option("--ledger", ledger_path, "Ledger JSON")->required();
    ver_cmd->add_option("--oracle", oracle, "transfer or grid");
    auto* rep_cmd = app.add_subcommand("report", "Write eigencloud.csv and norms.csv");
    rep_cmd->add_option("--ledger", ledger_path, "Ledger JSON")->required();
    rep_cmd->add_option("--out-dir", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    try {
        if (*bump_cmd) return cmd_bump(ba);
        if (*con_cmd) {
            if (phi_opt->count() > 0) ca.phi = phi;
            return cmd_construct(ca);
        }
        if (*ver_cmd) return cmd_verify(ledger_path, oracle);
        if (*rep_cmd) return cmd_report(ledger_path, out_dir);
    } catch (const Invalid& e) {
        logger()->error("invalid arguments: {}", e.what());
        return kValidation;
    } catch (const InvalidLedger& e) {
        logger()->error("{}", e.what());
        return kValidation;
    } catch (const InvalidArgument& e) {
        logger()->error("invalid arguments: {}", e.what());
        return kValidation;
    } catch (const std::exception& e) {
        logger()->error("{}", e.what());
        return kRuntime;
    }
    return kRuntime;
}

}  // namespace nsa::cli

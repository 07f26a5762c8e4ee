#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>

#include "snictorus/atlas.hpp"
#include "snictorus/curves.hpp"
#include "snictorus/errors.hpp"
#include "snictorus/io.hpp"
#include "snictorus/parallel.hpp"
#include "snictorus/separatrix.hpp"
#include "snictorus/transit.hpp"

namespace snic::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string normalize_key(std::string k) {
    std::replace(k.begin(), k.end(), '_', '-');
    return k;
}

bool is_true(const std::string& v) { return v == "true" || v == "on" || v == "yes"; }
bool is_false(const std::string& v) { return v == "false" || v == "off" || v == "no"; }

// ----------------------------------------------------------------------------
// Shared option groups
// ----------------------------------------------------------------------------

struct FamilyArgs {
    std::string family = "sine_box";
    double delta1 = 0.0;
    double delta2 = 0.0;
    double L = two_pi;
    bool reverse = false;

    void add(CLI::App& app) {
        app.add_option("--family", family, "reduced_box, explicit, sine_box or uncoupled")->capture_default_str();
        app.add_option("--delta1", delta1, "coupling delta1 (eps1 for the explicit family)")->capture_default_str();
        app.add_option("--delta2", delta2, "coupling delta2 (eps2 for the explicit family)")->capture_default_str();
        app.add_option("--L", L, "torus side of the sine box")->capture_default_str();
        app.add_flag("--reverse", reverse, "time-reversed field");
    }

    Family make() const {
        Family f = Family::make(parse_family_kind(family), delta1, delta2, L);
        if (family == "uncoupled") f.delta1 = f.delta2 = 0.0;
        return reverse ? f.time_reversed() : f;
    }
};

struct PointArgs {
    double mu1 = -0.05;
    double mu2 = -0.05;

    void add(CLI::App& app) {
        app.add_option("--mu1", mu1, "unfolding parameter mu1")->capture_default_str();
        app.add_option("--mu2", mu2, "unfolding parameter mu2")->capture_default_str();
    }
};

/// File named by --out, or the command's output stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw UsageError("cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : fallback_; }

private:
    std::ostream& fallback_;
    std::unique_ptr<std::ofstream> file_;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open '" + path + "' for writing");
    f << text;
}

std::string slope_cell(const std::optional<std::array<double, 2>>& s, int k) {
    if (!s) return "";
    return fmt17((*s)[static_cast<std::size_t>(k)]);
}

// ----------------------------------------------------------------------------
// Subcommands
// ----------------------------------------------------------------------------

struct Context {
    std::ostream& out;
    std::ostream& err;
};

using Action = std::function<void()>;

Action add_equilibria(CLI::App& app, Context& ctx) {
    auto* sub = app.add_subcommand("equilibria", "Equilibria with kinds, eigenvalues and eigenvector slopes");
    auto fam = std::make_shared<FamilyArgs>();
    auto pt = std::make_shared<PointArgs>();
    auto out = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("csv");
    fam->add(*sub);
    pt->add(*sub);
    sub->add_option("--out", *out, "output file (default stdout)");
    sub->add_option("--format", *format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    return [=, &ctx] {
        const Field f = fam->make().at(pt->mu1, pt->mu2);
        const auto eqs = find_equilibria(f);
        Sink sink(*out, ctx.out);
        if (*format == "json") {
            write_equilibria_json(sink.stream(), eqs);
            return;
        }
        CsvWriter w(sink.stream());
        w.header({"x1", "x2", "kind", "det", "tr", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "slope1",
                  "slope2"});
        for (const auto& e : eqs) {
            w.cell(e.p.x1).cell(e.p.x2).cell(to_string(e.kind)).cell(e.det).cell(e.tr);
            w.cell(e.eigenvalues[0].real()).cell(e.eigenvalues[0].imag());
            w.cell(e.eigenvalues[1].real()).cell(e.eigenvalues[1].imag());
            w.cell(std::string_view(slope_cell(e.slopes, 0))).cell(std::string_view(slope_cell(e.slopes, 1)));
            w.end_row();
        }
    };
}

Action add_curves(CLI::App& app, Context& ctx) {
    auto* sub = app.add_subcommand("curves", "Saddle-node curves of the reduced box");
    struct Args {
        double delta1 = 0.5, delta2 = 0.3;
        int sigma = 0;
        std::optional<double> theta_lo, theta_hi;
        int n = 401;
        std::string method = "analytic";
        int steps = 4000;
        std::string out;
    };
    auto a = std::make_shared<Args>();
    sub->add_option("--delta1", a->delta1, "coupling delta1")->capture_default_str();
    sub->add_option("--delta2", a->delta2, "coupling delta2")->capture_default_str();
    sub->add_option("--sigma", a->sigma, "+1 cusped, -1 outer, 0 both")
        ->check(CLI::IsMember({-1, 0, 1}))
        ->capture_default_str();
    sub->add_option("--theta-lo", a->theta_lo, "start of the theta range (default theta_c - 1)");
    sub->add_option("--theta-hi", a->theta_hi, "end of the theta range (default theta_c + 1)");
    sub->add_option("--n", a->n, "samples per branch")->check(CLI::Range(2, 1000000))->capture_default_str();
    sub->add_option("--method", a->method, "analytic or continued")
        ->check(CLI::IsMember({"analytic", "continued"}))
        ->capture_default_str();
    sub->add_option("--steps", a->steps, "continuation steps")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--out", a->out, "CSV output file (default stdout)");
    return [=, &ctx] {
        if (!(a->delta1 * a->delta2 > 0.0)) throw UsageError("curves: delta1 and delta2 must be nonzero with equal signs");
        const CuspData c = cusp(a->delta1, a->delta2);
        const double lo = a->theta_lo.value_or(c.theta_c - 1.0);
        const double hi = a->theta_hi.value_or(c.theta_c + 1.0);
        std::vector<int> sigmas = a->sigma == 0 ? std::vector<int>{1, -1} : std::vector<int>{a->sigma};
        Sink sink(a->out, ctx.out);
        if (a->method == "analytic") {
            std::vector<SneCurveSample> all;
            for (int s : sigmas) {
                auto part = sample_sne(a->delta1, a->delta2, s, lo, hi, a->n);
                all.insert(all.end(), part.begin(), part.end());
            }
            write_samples_csv(sink.stream(), all);
            return;
        }
        const Family fam = Family::reduced_box(a->delta1, a->delta2);
        bool header = true;
        for (int s : sigmas) {
            const SneCurveSample start = sne_analytic(a->delta1, a->delta2, s, lo);
            const SneCurveSample next = sne_analytic(a->delta1, a->delta2, s, lo + 1e-6);
            ContinuationOptions opts;
            opts.n_steps = a->steps;
            opts.hint = {next.x.x1 - start.x.x1, next.x.x2 - start.x.x2, next.mu.x1 - start.mu.x1,
                         next.mu.x2 - start.mu.x2};
            const SneCurveSample end = sne_analytic(a->delta1, a->delta2, s, hi);
            opts.mu_bound = 1.05 * std::max({max_abs(start.mu), max_abs(end.mu), max_abs(c.mu)});
            const CurveBranch b = continue_sne(fam, {start.x, start.mu}, opts);
            std::ostringstream text;
            write_branch_csv(text, b);
            std::string body = text.str();
            if (!header) body.erase(0, body.find('\n') + 1);
            sink.stream() << body;
            header = false;
        }
    };
}

Action add_scan(CLI::App& app, Context& ctx, const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    struct Args {
        std::string preset;
        FamilyArgs fam;
        double mu1_lo = -0.1, mu1_hi = 0.1, mu2_lo = -0.1, mu2_hi = 0.1;
        int nx = 101, ny = 101;
        std::string classifier = "count";
        unsigned threads = 0;
        std::uint64_t seed = 12345;
        bool no_continuation = false;
        std::string csv, json, svg, title;
    };
    auto a = std::make_shared<Args>();
    sub->add_option("--preset", a->preset, "named configuration: uncoupled-counts, explicit-regimes, box-counts, tpoint-regimes, excitatory-attractors, inhibitory-attractors");
    a->fam.add(*sub);
    sub->add_option("--mu1-lo", a->mu1_lo, "lower mu1 edge")->capture_default_str();
    sub->add_option("--mu1-hi", a->mu1_hi, "upper mu1 edge")->capture_default_str();
    sub->add_option("--mu2-lo", a->mu2_lo, "lower mu2 edge")->capture_default_str();
    sub->add_option("--mu2-hi", a->mu2_hi, "upper mu2 edge")->capture_default_str();
    sub->add_option("--nx", a->nx, "cells along mu1")->capture_default_str();
    sub->add_option("--ny", a->ny, "cells along mu2")->capture_default_str();
    sub->add_option("--classifier", a->classifier, "count, regime or attractor")
        ->check(CLI::IsMember({"count", "regime", "attractor"}))
        ->capture_default_str();
    sub->add_option("--threads", a->threads, "worker threads (default SNIC_THREADS or all cores)");
    sub->add_option("--seed", a->seed, "orbit sampling seed")->capture_default_str();
    sub->add_flag("--no-continuation", a->no_continuation, "attractor scans without column continuation");
    sub->add_option("--title", a->title, "SVG title");
    if (name == "scan") {
        sub->add_option("--out,--csv", a->csv, "CSV output file (default stdout)");
        sub->add_option("--json", a->json, "JSON summary file");
        sub->add_option("--svg", a->svg, "SVG raster file");
    } else {
        sub->add_option("--out,--svg", a->svg, "SVG output file (default stdout)");
        sub->add_option("--csv", a->csv, "CSV output file");
    }
    return [=, &ctx] {
        ScanConfig c = a->preset.empty() ? ScanConfig{} : preset(a->preset);
        const bool fresh = a->preset.empty();
        auto set = [&](const char* opt) { return fresh || sub->count(opt) > 0; };
        if (fresh) {
            c.family = a->fam.make();
        } else {
            FamilyArgs f = a->fam;
            if (!sub->count("--family")) f.family = c.family.name();
            if (!sub->count("--delta1")) f.delta1 = c.family.delta1;
            if (!sub->count("--delta2")) f.delta2 = c.family.delta2;
            if (!sub->count("--L")) f.L = c.family.L;
            f.reverse = c.family.reversed != a->fam.reverse;
            c.family = f.make();
        }
        if (set("--mu1-lo")) c.grid.mu1_lo = a->mu1_lo;
        if (set("--mu1-hi")) c.grid.mu1_hi = a->mu1_hi;
        if (set("--mu2-lo")) c.grid.mu2_lo = a->mu2_lo;
        if (set("--mu2-hi")) c.grid.mu2_hi = a->mu2_hi;
        if (set("--nx")) c.grid.nx = a->nx;
        if (set("--ny")) c.grid.ny = a->ny;
        if (set("--classifier")) c.classifier = parse_classifier(a->classifier);
        if (set("--seed")) c.seed = a->seed;
        c.threads = a->threads;
        c.continuation = !a->no_continuation;
        c.validate();
        const ScanResult r = scan(c);
        const std::string svg = render_scan_svg(r, a->title);
        if (name == "scan") {
            Sink sink(a->csv, ctx.out);
            write_scan_csv(sink.stream(), r);
            if (!a->json.empty()) {
                std::ofstream j(a->json);
                if (!j) throw UsageError("cannot open '" + a->json + "' for writing");
                write_scan_json(j, r);
            }
            if (!a->svg.empty()) write_file(a->svg, svg);
        } else {
            Sink sink(a->svg, ctx.out);
            sink.stream() << svg;
            if (!a->csv.empty()) {
                std::ofstream f(a->csv);
                if (!f) throw UsageError("cannot open '" + a->csv + "' for writing");
                write_scan_csv(f, r);
            }
        }
    };
}

Action add_winding(CLI::App& app, Context& ctx) {
    auto* sub = app.add_subcommand("winding", "Homology direction along mu1 = K/2 - lambda, mu2 = K/2 + lambda");
    struct Args {
        FamilyArgs fam;
        double K = 0.2, lambda_lo = -0.09, lambda_hi = 0.09;
        int n = 100;
        unsigned threads = 0;
        double T_max = 1e4;
        std::string out;
    };
    auto a = std::make_shared<Args>();
    a->fam.family = "explicit";
    a->fam.delta1 = 0.05;
    a->fam.delta2 = 0.03;
    a->fam.add(*sub);
    sub->add_option("--K", a->K, "mu1 + mu2 along the sweep")->capture_default_str();
    sub->add_option("--lambda-lo", a->lambda_lo, "first lambda")->capture_default_str();
    sub->add_option("--lambda-hi", a->lambda_hi, "last lambda")->capture_default_str();
    sub->add_option("--n", a->n, "samples")->check(CLI::Range(2, 100000))->capture_default_str();
    sub->add_option("--T-max", a->T_max, "integration time per orbit")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--threads", a->threads, "worker threads");
    sub->add_option("--out", a->out, "CSV output file (default stdout)");
    return [=, &ctx] {
        RegimeOptions opts;
        opts.T_max = a->T_max;
        const auto samples = winding_sweep(a->fam.make(), a->K, a->lambda_lo, a->lambda_hi, a->n, opts, a->threads);
        Sink sink(a->out, ctx.out);
        CsvWriter w(sink.stream());
        w.header({"lambda", "mu1", "mu2", "angle", "confidence", "regime", "p", "q"});
        for (const auto& s : samples) {
            w.cell(s.lambda).cell(s.mu.x1).cell(s.mu.x2).cell(s.angle).cell(s.confidence);
            w.cell(to_string(s.label.kind)).cell(s.label.type.p).cell(s.label.type.q);
            w.end_row();
        }
    };
}

Action add_transit(CLI::App& app, Context& ctx) {
    auto* sub = app.add_subcommand("transit", "Transit map between x2 = eta and x2 = L2 - eta");
    struct Args {
        std::vector<double> eta{0.05};
        bool sweep = false;
        double x1 = 0.0;
        std::string model = "cubic";
        double alpha = 1.0;
        int n = 41;
        std::string out;
        unsigned threads = 0;
    };
    auto a = std::make_shared<Args>();
    sub->add_option("--eta", a->eta, "strip half-width(s)")->check(CLI::PositiveNumber);
    sub->add_flag("--sweep", a->sweep, "error table over x1 in [-eta, eta/4] for every model");
    sub->add_option("--x1", a->x1, "entry point for a single transit")->capture_default_str();
    sub->add_option("--model", a->model, "exact_profile, cubic, mu1, mu2 or coupling")
        ->check(CLI::IsMember({"exact_profile", "cubic", "mu1", "mu2", "coupling"}))
        ->capture_default_str();
    sub->add_option("--alpha", a->alpha, "cubic deformation")->capture_default_str();
    sub->add_option("--n", a->n, "x1 samples per eta")->check(CLI::Range(2, 100000))->capture_default_str();
    sub->add_option("--threads", a->threads, "worker threads");
    sub->add_option("--out", a->out, "CSV output file (default stdout)");
    return [=, &ctx] {
        auto parse_case = [](const std::string& m) {
            for (TransitCase c : {TransitCase::exact_profile, TransitCase::cubic, TransitCase::mu1, TransitCase::mu2,
                                  TransitCase::coupling})
                if (to_string(c) == m) return c;
            throw UsageError("unknown transit model '" + m + "'");
        };
        TransitScanConfig cfg;
        cfg.etas = a->eta;
        cfg.alpha = a->alpha;
        cfg.n_x1 = a->n;
        Sink sink(a->out, ctx.out);
        if (a->sweep) {
            cfg.cases = sub->count("--model") ? std::vector<TransitCase>{parse_case(a->model)}
                                              : std::vector<TransitCase>{TransitCase::exact_profile, TransitCase::cubic,
                                                                         TransitCase::mu1, TransitCase::mu2,
                                                                         TransitCase::coupling};
            write_transit_csv(sink.stream(), transit_error_scan(cfg, a->threads));
            return;
        }
        const TransitCase kind = parse_case(a->model);
        const Field f = transit_model(kind, cfg);
        CsvWriter w(sink.stream());
        w.header({"eta", "x1", "case", "numeric", "closed_form", "err", "t2", "escaped"});
        for (double eta : a->eta) {
            const TransitResult r = transit_numeric(f, a->x1, eta);
            const double cf = transit_closed_form(a->x1, eta);
            w.cell(eta).cell(a->x1).cell(to_string(kind)).cell(r.x1_out).cell(cf).cell(std::abs(r.x1_out - cf));
            w.cell(r.t2).cell(r.escaped ? 1 : 0);
            w.end_row();
        }
    };
}

SaddleBranch pick_branch(const BranchSet& set, char label) {
    switch (label) {
        case 'A': return set.A;
        case 'B': return set.B;
        case 'C': return set.C;
        case 'D': return set.D;
        default: break;
    }
    for (const auto& b : set.all)
        if (b.label == label) return b;
    throw UsageError(std::string("no branch labeled '") + label + "'");
}

Action add_trace(CLI::App& app, Context& ctx) {
    auto* sub = app.add_subcommand("trace", "Trace a saddle separatrix branch on the universal cover");
    struct Args {
        FamilyArgs fam;
        PointArgs pt;
        std::string branch = "D";
        double T = 1e4;
        std::string out, trajectory;
    };
    auto a = std::make_shared<Args>();
    a->fam.family = "explicit";
    a->fam.delta1 = 0.01;
    a->fam.delta2 = 0.006;
    a->fam.add(*sub);
    a->pt.add(*sub);
    sub->add_option("--branch", a->branch, "A, B, C, D or a lowercase opposite branch")
        ->check(CLI::IsMember({"A", "B", "C", "D", "a", "b", "c", "d"}))
        ->capture_default_str();
    sub->add_option("--T", a->T, "time budget")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--out", a->out, "JSON output file (default stdout)");
    sub->add_option("--trajectory", a->trajectory, "CSV file for the traced orbit");
    return [=, &ctx] {
        const Field f = a->fam.make().at(a->pt.mu1, a->pt.mu2);
        const auto eqs = find_equilibria(f);
        const auto set = label_branches(f, eqs);
        if (!set) throw NumericalError("trace: the field has no saddle");
        TraceOptions opts;
        opts.T_budget = a->T;
        opts.keep_trajectory = !a->trajectory.empty();
        const ConnectionResult r = trace_branch(f, pick_branch(*set, a->branch.front()), eqs, opts);
        Sink sink(a->out, ctx.out);
        write_connections_json(sink.stream(), {r}, eqs);
        if (!a->trajectory.empty()) {
            std::ofstream t(a->trajectory);
            if (!t) throw UsageError("cannot open '" + a->trajectory + "' for writing");
            r.trajectory.write_csv(t);
        }
    };
}

Action add_tartan(CLI::App& app, Context& ctx) {
    auto* sub = app.add_subcommand("tartan", "Check the basic tartan portrait");
    struct Args {
        FamilyArgs fam;
        PointArgs pt;
        unsigned threads = 0;
        std::string out;
    };
    auto a = std::make_shared<Args>();
    a->fam.family = "explicit";
    a->fam.delta1 = 0.01;
    a->fam.delta2 = 0.006;
    a->fam.add(*sub);
    a->pt.add(*sub);
    sub->add_option("--threads", a->threads, "worker threads");
    sub->add_option("--out", a->out, "JSON file for the eight connections");
    return [=, &ctx] {
        const Field f = a->fam.make().at(a->pt.mu1, a->pt.mu2);
        const TartanReport r = verify_basic_tartan(f, {}, a->threads);
        ctx.out << "basic_tartan " << (r.basic ? "true" : "false") << "\nreason " << to_string(r.reason) << '\n';
        if (!r.detail.empty()) ctx.out << "detail " << r.detail << '\n';
        for (const auto& c : r.connections)
            ctx.out << c.branch << ' ' << to_string(c.kind) << " (" << c.m << ',' << c.n << ")\n";
        if (!a->out.empty()) {
            std::ofstream j(a->out);
            if (!j) throw UsageError("cannot open '" + a->out + "' for writing");
            write_connections_json(j, r.connections, r.equilibria);
        }
    };
}

}  // namespace

std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::vector<std::string> tokens;
    for (const auto& item : CLI::ConfigTOML().from_config(in)) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents.front() == "default"))
            throw UsageError("config: sections are not supported ('" + item.fullname() + "')");
        const std::string flag = "--" + normalize_key(item.name);
        if (item.inputs.size() == 1 && is_true(item.inputs.front())) {
            tokens.push_back(flag);
            continue;
        }
        if (item.inputs.size() == 1 && is_false(item.inputs.front())) continue;
        tokens.push_back(flag);
        tokens.insert(tokens.end(), item.inputs.begin(), item.inputs.end());
    }
    return tokens;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Saddle-node on invariant circle flows on the torus", "snic"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough(false);
    app.allow_extras();
    std::string config_path;
    app.add_option("--config", config_path, "key = value file applied before command-line flags");

    Context ctx{out, err};
    std::vector<std::pair<CLI::App*, Action>> actions;
    auto reg = [&](const char* name, Action a) { actions.emplace_back(app.get_subcommand(name), std::move(a)); };
    reg("equilibria", add_equilibria(app, ctx));
    reg("curves", add_curves(app, ctx));
    reg("scan", add_scan(app, ctx, "scan", "Parameter-plane scan with CSV, JSON and SVG output"));
    reg("winding", add_winding(app, ctx));
    reg("transit", add_transit(app, ctx));
    reg("trace", add_trace(app, ctx));
    reg("tartan", add_tartan(app, ctx));
    reg("render", add_scan(app, ctx, "render", "Scan rendered as a layered SVG map"));
    for (auto& entry : actions) entry.first->allow_extras();

    std::vector<std::string> tokens(args.begin(), args.end());
    try {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            std::string path;
            std::size_t n = 0;
            if (tokens[i] == "--config") {
                if (i + 1 >= tokens.size()) throw UsageError("--config requires a file");
                path = tokens[i + 1];
                n = 2;
            } else if (tokens[i].rfind("--config=", 0) == 0) {
                path = tokens[i].substr(9);
                n = 1;
            } else {
                continue;
            }
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
            const auto extra = config_tokens(path);
            std::size_t at = 0;
            for (std::size_t k = 0; k < tokens.size(); ++k) {
                if (app.get_subcommand_no_throw(tokens[k]) != nullptr) {
                    at = k + 1;
                    break;
                }
            }
            tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
            break;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }

    try {
        std::vector<const char*> argv{"snic"};
        for (const auto& t : tokens) argv.push_back(t.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return ok;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return ok;
        }
        if (!tokens.empty() && tokens.front().rfind('-', 0) != 0 && app.get_subcommand_no_throw(tokens.front()) == nullptr)
            err << "error: unknown subcommand '" << tokens.front() << "'\n";
        else
            err << "error: " << e.what() << '\n';
        return usage;
    }
    std::vector<std::string> extras = app.remaining();
    for (auto& entry : actions)
        if (entry.first->parsed())
            for (const auto& t : entry.first->remaining()) extras.push_back(t);
    if (!extras.empty()) {
        const auto flag = std::find_if(extras.begin(), extras.end(), [](const std::string& t) { return t.rfind('-', 0) == 0; });
        err << "error: unrecognized argument '" << (flag != extras.end() ? *flag : extras.front()) << "'\n";
        return usage;
    }

    try {
        for (auto& [sub, action] : actions)
            if (sub->parsed()) action();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical;
    }
    return ok;
}

}  // namespace snic::cli

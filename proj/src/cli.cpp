#include "uotkit/cli.hpp"

#include "uotkit/error.hpp"
#include "uotkit/fixtures.hpp"
#include "uotkit/io.hpp"
#include "uotkit/measures.hpp"
#include "uotkit/metrics.hpp"
#include "uotkit/objective.hpp"
#include "uotkit/oracle.hpp"
#include "uotkit/parallel.hpp"
#include "uotkit/pathology_correlation.hpp"
#include "uotkit/stain_optics.hpp"
#include "uotkit/transport_cycle.hpp"
#include "uotkit/uot_solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace uotkit::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// nlohmann prints the shortest round-trip form; reports use a fixed 17 digits.
void write_json(std::ostream& os, const json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) os << ",\n";
            first = false;
            os << pad << json(key).dump() << ": ";
            write_json(os, value, indent, depth + 1);
        }
        os << '\n' << close_pad << '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        const bool flat = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); });
        if (flat) {
            os << '[';
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) os << ", ";
                write_json(os, j[k], indent, depth + 1);
            }
            os << ']';
            return;
        }
        os << "[\n";
        for (std::size_t k = 0; k < j.size(); ++k) {
            if (k) os << ",\n";
            os << pad;
            write_json(os, j[k], indent, depth + 1);
        }
        os << '\n' << close_pad << ']';
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        require(std::isfinite(v), ErrorCode::non_finite, "report scalar is not finite");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        std::string s = buf;
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        os << s;
        return;
    }
    default:
        os << j.dump();
    }
}

class Report {
public:
    explicit Report(std::string command) { doc_["command"] = std::move(command); }

    void input(const std::string& role, const fs::path& path) {
        doc_["inputs"].push_back({{"role", role}, {"path", path.generic_string()}, {"sha256", io::file_digest(path)}});
    }
    json& parameters() { return doc_["parameters"]; }
    json& outputs() { return doc_["outputs"]; }
    void wall_time(double seconds) { doc_["wall_time"] = seconds; }

    void emit(std::ostream& os) const {
        json full = doc_;
        if (!full.contains("inputs")) full["inputs"] = json::array();
        if (!full.contains("parameters")) full["parameters"] = json::object();
        if (!full.contains("outputs")) full["outputs"] = json::object();
        json ordered;
        for (const char* key : {"command", "inputs", "parameters", "outputs", "wall_time"})
            if (full.contains(key)) ordered[key] = full[key];
        write_json(os, ordered, 2, 0);
        os << '\n';
    }

private:
    json doc_;
};

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Matrix inputs are recorded in the report as they are read.
Matrix load_matrix(Report& r, const std::string& role, const fs::path& path) {
    r.input(role, path);
    return io::read_matrix(path);
}

Vector load_vector(Report& r, const std::string& role, const fs::path& path) {
    r.input(role, path);
    return io::read_vector(path);
}

RgbImage load_png(Report& r, const std::string& role, const fs::path& path) {
    r.input(role, path);
    return io::read_png(path);
}

void write_matrix(const Matrix& m, const fs::path& path) {
    if (path.extension() == ".csv")
        io::write_csv_matrix(m, path);
    else
        io::write_umat(m, path);
}

// Files in a directory with one of the given extensions, sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, const std::set<std::string>& extensions) {
    require(fs::is_directory(dir), ErrorCode::io_error, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && extensions.count(entry.path().extension().string())) files.push_back(entry.path());
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    return files;
}

void require_same_names(const std::vector<fs::path>& a, const std::vector<fs::path>& b) {
    require(a.size() == b.size(), ErrorCode::invalid_argument,
            "directories hold " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " files");
    for (std::size_t k = 0; k < a.size(); ++k)
        require(a[k].filename() == b[k].filename(), ErrorCode::invalid_argument,
                "unpaired files " + a[k].filename().string() + " and " + b[k].filename().string());
}

struct StainOptions {
    std::string stains_path;
    std::vector<double> i0{default_i0[0]};
    int dab_index = dab_channel_index;

    void add(CLI::App* sub) {
        sub->add_option("--stains", stains_path, "Stain matrix CSV, nine values, one stain after another");
        sub->add_option("--i0", i0, "Reference intensity, one value or one per RGB channel")
            ->expected(1, 3)
            ->capture_default_str();
        sub->add_option("--dab-index", dab_index, "Stain column holding DAB")->check(CLI::Range(0, 2))->capture_default_str();
    }

    StainMatrix stains(Report& r) const {
        if (stains_path.empty()) return StainMatrix::h_dab();
        const Matrix m = load_matrix(r, "stains", stains_path);
        require(m.size() == 9, ErrorCode::format_error,
                "stain matrix file must hold 9 values, found " + std::to_string(m.size()));
        std::array<double, 9> v{};
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) v[k++] = m(i, j);
        return StainMatrix::from_column_major(v);
    }

    ReferenceIntensity reference() const {
        require(i0.size() == 1 || i0.size() == 3, ErrorCode::invalid_argument, "--i0 takes one or three values");
        ReferenceIntensity out{};
        for (std::size_t c = 0; c < 3; ++c) out[c] = i0.size() == 1 ? i0[0] : i0[c];
        for (double v : out)
            require(std::isfinite(v) && v >= intensity_floor, ErrorCode::invalid_argument,
                    "reference intensity must be finite and >= 1");
        return out;
    }

    void record(Report& r) const {
        const ReferenceIntensity ref = reference();
        r.parameters()["stains"] = stains_path.empty() ? std::string("h-dab") : stains_path;
        r.parameters()["i0"] = {ref[0], ref[1], ref[2]};
        r.parameters()["dab_index"] = dab_index;
    }
};

std::vector<std::vector<double>> load_grayscale_set(Report& r, const std::string& role, const fs::path& path,
                                                    std::vector<std::string>& names) {
    std::vector<fs::path> files;
    if (fs::is_directory(path))
        files = list_files(path, {".png"});
    else
        files.push_back(path);
    require(!files.empty(), ErrorCode::invalid_argument, path.string() + " holds no PNG images");
    std::vector<std::vector<double>> out;
    names.clear();
    for (const auto& f : files) {
        out.push_back(to_grayscale(load_png(r, role, f)));
        names.push_back(f.filename().string());
    }
    return out;
}

// A density series: a vector file, or a directory of PNGs reduced to integrated density each.
std::vector<double> load_density_series(Report& r, const std::string& role, const fs::path& path,
                                        const StainMatrix& stains, const ReferenceIntensity& i0, int dab_index) {
    std::vector<double> out;
    if (fs::is_directory(path)) {
        for (const auto& f : list_files(path, {".png"}))
            out.push_back(dab_channel(load_png(r, role, f), stains, i0, dab_index).sum());
        require(!out.empty(), ErrorCode::invalid_argument, path.string() + " holds no PNG images");
    } else {
        const Vector v = load_vector(r, role, path);
        out.assign(v.data(), v.data() + v.size());
    }
    return out;
}

unsigned parse_thread_env(const char* value) {
    if (value == nullptr || *value == '\0') return 0;
    const std::string s = value;
    unsigned n = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw CLI::ValidationError("UOTKIT_THREADS", "must be a non-negative integer, got '" + s + "'");
    return n;
}

using Command = std::function<void(Report&)>;

struct Registry {
    std::vector<std::pair<CLI::App*, Command>> commands;
    void add(CLI::App* sub, Command cmd) { commands.emplace_back(sub, std::move(cmd)); }
};

struct SolverOptions {
    double epsilon = default_epsilon;
    double tau = default_tau;
    bool balanced = false;

    void add(CLI::App* sub) {
        sub->add_option("--epsilon", epsilon, "Entropic regularization")->capture_default_str();
        sub->add_option("--tau", tau, "KL marginal penalty weight")->capture_default_str();
        sub->add_flag("--balanced", balanced, "Hard marginal constraints (ignores --tau)");
    }
};

void register_uot_solve(CLI::App& app, Registry& reg) {
    struct Opts {
        std::string cost, p, q, out, out_u, out_v;
        SolverOptions solver;
        int max_iter = default_max_iter;
        double tol = default_tol;
        bool anneal = false;
        int anneal_stages = 10;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("uot-solve", "Entropic (unbalanced) transport between two measures");
    sub->add_option("--cost", o->cost, "Cost matrix (UMAT or CSV)")->required();
    sub->add_option("--p", o->p, "Source weights")->required();
    sub->add_option("--q", o->q, "Target weights")->required();
    o->solver.add(sub);
    sub->add_option("--max-iter", o->max_iter, "Iteration cap")->capture_default_str();
    sub->add_option("--tol", o->tol, "Dual update tolerance")->capture_default_str();
    sub->add_flag("--anneal", o->anneal, "Solve a decreasing epsilon ladder, warm started");
    sub->add_option("--anneal-stages", o->anneal_stages, "Ladder length")->capture_default_str();
    sub->add_option("--out", o->out, "Plan output (UMAT, or CSV by extension)");
    sub->add_option("--out-u", o->out_u, "Row potentials output");
    sub->add_option("--out-v", o->out_v, "Column potentials output");
    reg.add(sub, [o](Report& r) {
        const CostMatrix cost(load_matrix(r, "cost", o->cost));
        const DiscreteMeasure p(load_vector(r, "p", o->p));
        const DiscreteMeasure q(load_vector(r, "q", o->q));
        SolverConfig cfg = o->solver.balanced ? SolverConfig::make_balanced(o->solver.epsilon)
                                              : SolverConfig::make_unbalanced(o->solver.epsilon, o->solver.tau);
        cfg.max_iter = o->max_iter;
        cfg.tol = o->tol;
        cfg.anneal = o->anneal;
        cfg.anneal_stages = o->anneal_stages;
        auto& par = r.parameters();
        par["epsilon"] = cfg.epsilon;
        par["tau"] = cfg.balanced() ? json(nullptr) : json(*cfg.tau);
        par["balanced"] = cfg.balanced();
        par["max_iter"] = cfg.max_iter;
        par["tol"] = cfg.tol;
        par["anneal"] = cfg.anneal;
        par["anneal_stages"] = cfg.anneal_stages;

        const TransportPlan plan = solve(cost, p, q, cfg);
        const ObjectiveReport rep = evaluate_primal(plan.plan, cost, p, q, cfg);
        auto& out = r.outputs();
        out["converged"] = plan.converged;
        out["iterations"] = plan.iterations;
        out["objective"] = rep.value;
        out["transport_cost"] = rep.transport_cost;
        out["entropy"] = rep.entropy;
        if (!cfg.balanced()) {
            out["kl_rows"] = rep.kl_rows;
            out["kl_cols"] = rep.kl_cols;
        }
        out["marginal_violation"] = rep.marginal_violation;
        out["plan_mass"] = plan.plan.sum();
        if (!o->out.empty()) {
            write_matrix(plan.plan, o->out);
            out["plan"] = o->out;
        }
        if (!o->out_u.empty()) {
            write_matrix(plan.u, o->out_u);
            out["u"] = o->out_u;
        }
        if (!o->out_v.empty()) {
            write_matrix(plan.v, o->out_v);
            out["v"] = o->out_v;
        }
    });
}

void register_oracle(CLI::App& app, Registry& reg) {
    struct Opts {
        std::string cost, p, q, out;
        SolverOptions solver;
        int levels = SearchOptions{}.levels;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("oracle", "Brute-force reference optimum for a small instance");
    sub->add_option("--cost", o->cost, "Cost matrix")->required();
    sub->add_option("--p", o->p, "Source weights")->required();
    sub->add_option("--q", o->q, "Target weights")->required();
    o->solver.add(sub);
    sub->add_option("--levels", o->levels, "Grid refinement levels (unbalanced)")->capture_default_str();
    sub->add_option("--out", o->out, "Plan output");
    reg.add(sub, [o](Report& r) {
        const CostMatrix cost(load_matrix(r, "cost", o->cost));
        const DiscreteMeasure p(load_vector(r, "p", o->p));
        const DiscreteMeasure q(load_vector(r, "q", o->q));
        OracleResult res;
        auto& par = r.parameters();
        par["balanced"] = o->solver.balanced;
        if (o->solver.balanced) {
            res = lp_balanced(cost, p, q);
        } else {
            const SolverConfig cfg = SolverConfig::make_unbalanced(o->solver.epsilon, o->solver.tau);
            par["epsilon"] = cfg.epsilon;
            par["tau"] = *cfg.tau;
            par["levels"] = o->levels;
            SearchOptions so;
            so.levels = o->levels;
            res = uot_dense_search(cost, p, q, cfg, so);
        }
        auto& out = r.outputs();
        out["method"] = std::string(to_string(res.method));
        out["objective"] = res.objective;
        if (!o->out.empty()) {
            write_matrix(res.plan, o->out);
            out["plan"] = o->out;
        }
    });
}

void register_cost_matrix(CLI::App& app, Registry& reg) {
    struct Opts {
        std::string x, y, out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("cost-matrix", "Negative cosine cost between two feature sets");
    sub->add_option("--x", o->x, "Source features, one row per point")->required();
    sub->add_option("--y", o->y, "Target features, one row per point")->required();
    sub->add_option("--out", o->out, "Cost output")->required();
    reg.add(sub, [o](Report& r) {
        const FeatureSet x(load_matrix(r, "x", o->x));
        const FeatureSet y(load_matrix(r, "y", o->y));
        const CostMatrix c = neg_cosine_cost(x, y);
        write_matrix(c.values(), o->out);
        auto& out = r.outputs();
        out["rows"] = c.rows();
        out["cols"] = c.cols();
        out["min"] = c.values().minCoeff();
        out["max"] = c.values().maxCoeff();
        out["cost"] = o->out;
    });
}

void register_tcyc(CLI::App& app, Registry& reg) {
    struct Opts {
        std::string hi, ii, direct;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("tcyc", "Cycle-consistency residual of three plans");
    sub->add_option("--plan-hi", o->hi, "H&E to weakly paired IHC plan")->required();
    sub->add_option("--plan-ii", o->ii, "Weakly paired IHC to generated IHC plan")->required();
    sub->add_option("--plan-direct", o->direct, "H&E to generated IHC plan")->required();
    reg.add(sub, [o](Report& r) {
        PlanTriple t;
        t.t_hi = load_matrix(r, "plan_hi", o->hi);
        t.t_ii = load_matrix(r, "plan_ii", o->ii);
        t.t_direct = load_matrix(r, "plan_direct", o->direct);
        r.outputs()["residual"] = tcyc_residual(t);
    });
}

void register_deconv(CLI::App& app, Registry& reg) {
    struct Opts {
        std::string image, out_dir;
        StainOptions stain;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("deconv", "Color deconvolution of an RGB image into stain concentrations");
    sub->add_option("--image", o->image, "8-bit RGB PNG")->required();
    o->stain.add(sub);
    sub->add_option("--out-dir", o->out_dir, "Directory for stain0.umat, stain1.umat, stain2.umat");
    reg.add(sub, [o](Report& r) {
        const RgbImage img = load_png(r, "image", o->image);
        const StainMatrix stains = o->stain.stains(r);
        o->stain.record(r);
        const auto conc = deconvolve(rgb_to_od(img, o->stain.reference()), stains);
        auto& out = r.outputs();
        out["width"] = img.width;
        out["height"] = img.height;
        json sums = json::array();
        for (const auto& c : conc) sums.push_back(c.sum());
        out["stain_sums"] = sums;
        out["dab_sum"] = conc[static_cast<std::size_t>(o->stain.dab_index)].sum();
        if (!o->out_dir.empty()) {
            fs::create_directories(o->out_dir);
            json files = json::array();
            for (std::size_t k = 0; k < conc.size(); ++k) {
                const fs::path p = fs::path(o->out_dir) / ("stain" + std::to_string(k) + ".umat");
                io::write_umat(io::od_to_matrix(conc[k]), p);
                files.push_back(p.generic_string());
            }
            out["files"] = files;
        }
    });
}

void register_fod(CLI::App& app, Registry& reg) {
    struct Opts {
        std::string od, image, out;
        double alpha = FodConfig{}.alpha;
        StainOptions stain;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("fod", "Focal optical density of a DAB OD map");
    auto* od_opt = sub->add_option("--od", o->od, "Single-channel OD map (UMAT or CSV)");
    auto* img_opt = sub->add_option("--image", o->image, "RGB PNG; its DAB channel is used");
    od_opt->excludes(img_opt);
    sub->add_option("--alpha", o->alpha, "Focal exponent, > 1")->capture_default_str();
    o->stain.add(sub);
    sub->add_option("--out", o->out, "FOD map output");
    reg.add(sub, [o](Report& r) {
        require(!o->od.empty() || !o->image.empty(), ErrorCode::invalid_argument, "give --od or --image");
        OdMap od;
        if (!o->od.empty()) {
            od = io::matrix_to_od(load_matrix(r, "od", o->od));
        } else {
            const RgbImage img = load_png(r, "image", o->image);
            const StainMatrix stains = o->stain.stains(r);
            o->stain.record(r);
            od = dab_channel(img, stains, o->stain.reference(), o->stain.dab_index);
        }
        FodConfig cfg;
        cfg.alpha = o->alpha;
        r.parameters()["alpha"] = cfg.alpha;
        const OdMap f = focal_od(od, cfg);
        auto& out = r.outputs();
        out["od_sum"] = od.sum();
        out["fod_sum"] = f.sum();
        if (!o->out.empty()) {
            write_matrix(io::od_to_matrix(f), o->out);
            out["fod"] = o->out;
        }
    });
}

void register_odc(CLI::App& app, Registry& reg) {
    struct Opts {
        std::string real, fake, out_dir;
        double alpha = FodConfig{}.alpha;
        StainOptions stain;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("odc", "Optical-density correlation loss between two batches");
    sub->add_option("--real", o->real, "Directory of real IHC images (PNG) or DAB OD maps (UMAT)")->required();
    sub->add_option("--fake", o->fake, "Directory of generated images with the same file names")->required();
    sub->add_option("--alpha", o->alpha, "Focal exponent, > 1")->capture_default_str();
    o->stain.add(sub);
    sub->add_option("--out-dir", o->out_dir, "Directory for real_corr.csv and fake_corr.csv");
    reg.add(sub, [o](Report& r) {
        const auto real_files = list_files(o->real, {".png", ".umat"});
        const auto fake_files = list_files(o->fake, {".png", ".umat"});
        require(!real_files.empty(), ErrorCode::invalid_argument, o->real + " holds no PNG or UMAT files");
        require_same_names(real_files, fake_files);
        const bool any_png = std::any_of(real_files.begin(), real_files.end(),
                                         [](const fs::path& p) { return p.extension() == ".png"; });
        const StainMatrix stains = any_png ? o->stain.stains(r) : StainMatrix::h_dab();
        if (any_png) o->stain.record(r);
        const auto load = [&](const std::string& role, const fs::path& p) {
            if (p.extension() == ".png")
                return dab_channel(load_png(r, role, p), stains, o->stain.reference(), o->stain.dab_index);
            return io::matrix_to_od(load_matrix(r, role, p));
        };
        std::vector<OdMap> real;
        std::vector<OdMap> fake;
        for (const auto& p : real_files) real.push_back(load("real", p));
        for (const auto& p : fake_files) fake.push_back(load("fake", p));
        FodConfig cfg;
        cfg.alpha = o->alpha;
        r.parameters()["alpha"] = cfg.alpha;
        const OdcTerms terms = odc_terms(real, fake, cfg);
        auto& out = r.outputs();
        out["loss"] = terms.total();
        out["correlation_term"] = terms.correlation;
        out["mass_term"] = terms.mass;
        out["real_correlation"] = matrix_json(terms.real.values());
        out["fake_correlation"] = matrix_json(terms.fake.values());
        if (!o->out_dir.empty()) {
            fs::create_directories(o->out_dir);
            const fs::path rp = fs::path(o->out_dir) / "real_corr.csv";
            const fs::path fp = fs::path(o->out_dir) / "fake_corr.csv";
            io::write_csv_matrix(terms.real.values(), rp);
            io::write_csv_matrix(terms.fake.values(), fp);
            out["files"] = {rp.generic_string(), fp.generic_string()};
        }
    });
}

void register_cc(CLI::App& app, Registry& reg) {
    struct Opts {
        std::vector<std::string> real, fake;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("cc", "Multi-level feature correlation loss");
    sub->add_option("--real", o->real, "Real feature matrix per level (rows = batch samples)")->required();
    sub->add_option("--fake", o->fake, "Generated feature matrix per level, same order")->required();
    reg.add(sub, [o](Report& r) {
        require(o->real.size() == o->fake.size(), ErrorCode::invalid_argument,
                "--real and --fake need the same number of levels");
        std::vector<FeatureSet> real;
        std::vector<FeatureSet> fake;
        for (const auto& p : o->real) real.emplace_back(load_matrix(r, "real", p));
        for (const auto& p : o->fake) fake.emplace_back(load_matrix(r, "fake", p));
        r.parameters()["levels"] = real.size();
        r.outputs()["loss"] = cc_loss(real, fake);
    });
}

void register_loss(CLI::App& app, Registry& reg) {
    auto* loss = app.add_subcommand("loss", "Objective terms");
    loss->require_subcommand(1);

    struct TotalOpts {
        double tcyc = 0, cc = 0, odc = 0, nce = 0, adv = 0;
        LossWeights w;
    };
    auto t = std::make_shared<TotalOpts>();
    auto* total = loss->add_subcommand("total", "Weighted generator objective from five term values");
    total->add_option("--tcyc", t->tcyc, "Cycle-consistency term")->capture_default_str();
    total->add_option("--cc", t->cc, "Feature correlation term")->capture_default_str();
    total->add_option("--odc", t->odc, "Optical-density correlation term")->capture_default_str();
    total->add_option("--nce", t->nce, "PatchNCE term")->capture_default_str();
    total->add_option("--adv", t->adv, "Adversarial term")->capture_default_str();
    total->add_option("--lambda-tcyc", t->w.lambda_tcyc)->capture_default_str();
    total->add_option("--lambda-cc", t->w.lambda_cc)->capture_default_str();
    total->add_option("--lambda-odc", t->w.lambda_odc)->capture_default_str();
    total->add_option("--lambda-nce", t->w.lambda_nce)->capture_default_str();
    total->add_option("--lambda-adv", t->w.lambda_adv)->capture_default_str();
    reg.add(total, [t](Report& r) {
        auto& par = r.parameters();
        par["lambda_tcyc"] = t->w.lambda_tcyc;
        par["lambda_cc"] = t->w.lambda_cc;
        par["lambda_odc"] = t->w.lambda_odc;
        par["lambda_nce"] = t->w.lambda_nce;
        par["lambda_adv"] = t->w.lambda_adv;
        par["terms"] = {{"tcyc", t->tcyc}, {"cc", t->cc}, {"odc", t->odc}, {"nce", t->nce}, {"adv", t->adv}};
        r.outputs()["total"] = total_loss(t->tcyc, t->cc, t->odc, t->nce, t->adv, t->w);
    });

    struct NceOpts {
        std::string anchor, positive, negatives;
        double temperature = default_nce_temperature;
    };
    auto n = std::make_shared<NceOpts>();
    auto* nce = loss->add_subcommand("nce", "InfoNCE loss of one anchor");
    nce->add_option("--anchor", n->anchor, "Anchor embedding (vector file)")->required();
    nce->add_option("--positive", n->positive, "Positive embedding (vector file)")->required();
    nce->add_option("--negatives", n->negatives, "Negative embeddings, one per row");
    nce->add_option("--nce-temp", n->temperature, "Temperature")->capture_default_str();
    reg.add(nce, [n](Report& r) {
        const Vector a = load_vector(r, "anchor", n->anchor);
        const Vector p = load_vector(r, "positive", n->positive);
        std::vector<Embedding> negs;
        if (!n->negatives.empty()) {
            const Matrix m = load_matrix(r, "negatives", n->negatives);
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                Embedding e(static_cast<std::size_t>(m.cols()));
                for (Eigen::Index j = 0; j < m.cols(); ++j) e[static_cast<std::size_t>(j)] = m(i, j);
                negs.push_back(std::move(e));
            }
        }
        NceConfig cfg;
        cfg.temperature = n->temperature;
        r.parameters()["nce_temperature"] = cfg.temperature;
        r.parameters()["negatives"] = negs.size();
        r.outputs()["loss"] = nce_loss(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                                       std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), negs,
                                       cfg);
    });

    struct AdvOpts {
        std::string d_real, d_fake;
    };
    auto a = std::make_shared<AdvOpts>();
    auto* adv = loss->add_subcommand("adv", "Adversarial value from discriminator scores");
    adv->add_option("--d-real", a->d_real, "Scores on real images (vector file)")->required();
    adv->add_option("--d-fake", a->d_fake, "Scores on generated images (vector file)")->required();
    reg.add(adv, [a](Report& r) {
        const Vector dr = load_vector(r, "d_real", a->d_real);
        const Vector df = load_vector(r, "d_fake", a->d_fake);
        r.outputs()["value"] =
            adversarial_value(std::span<const double>(dr.data(), static_cast<std::size_t>(dr.size())),
                              std::span<const double>(df.data(), static_cast<std::size_t>(df.size())));
    });
}

void register_metrics(CLI::App& app, Registry& reg) {
    auto* metrics = app.add_subcommand("metrics", "Evaluation metrics");
    metrics->require_subcommand(1);

    struct SeriesOpts {
        std::string a, b;
        StainOptions stain;
    };
    const auto add_series = [&](const std::string& name, const std::string& help, bool correlate) {
        auto o = std::make_shared<SeriesOpts>();
        auto* sub = metrics->add_subcommand(name, help);
        sub->add_option("--virtual", o->a, "Generated set: directory of PNGs or a density vector file")->required();
        sub->add_option("--reference", o->b, "Reference set: directory of PNGs or a density vector file")->required();
        o->stain.add(sub);
        reg.add(sub, [o, correlate](Report& r) {
            const StainMatrix stains = o->stain.stains(r);
            o->stain.record(r);
            const ReferenceIntensity i0 = o->stain.reference();
            const auto v = load_density_series(r, "virtual", o->a, stains, i0, o->stain.dab_index);
            const auto ref = load_density_series(r, "reference", o->b, stains, i0, o->stain.dab_index);
            auto& out = r.outputs();
            out["virtual_total"] = std::accumulate(v.begin(), v.end(), 0.0);
            out["reference_total"] = std::accumulate(ref.begin(), ref.end(), 0.0);
            if (correlate)
                out["pearson_p"] = pearson_densities(v, ref);
            else
                out["iod"] = iod(v, ref);
        });
    };
    add_series("iod", "Scaled difference of total integrated density", false);
    add_series("pearson-p", "Correlation of per-image integrated densities", true);

    struct ContentOpts {
        std::string a, b;
        bool pooled = false;
    };
    auto c = std::make_shared<ContentOpts>();
    auto* pc = metrics->add_subcommand("pearson-c", "Grayscale content correlation of paired images");
    pc->add_option("--virtual", c->a, "Generated PNG or directory of PNGs")->required();
    pc->add_option("--reference", c->b, "Reference PNG or directory with the same file names")->required();
    pc->add_flag("--pooled", c->pooled, "One correlation over all pixels instead of the per-image mean");
    reg.add(pc, [c](Report& r) {
        std::vector<std::string> na;
        std::vector<std::string> nb;
        const auto a = load_grayscale_set(r, "virtual", c->a, na);
        const auto b = load_grayscale_set(r, "reference", c->b, nb);
        require(a.size() == b.size(), ErrorCode::invalid_argument, "image sets differ in size");
        if (fs::is_directory(c->a))
            for (std::size_t k = 0; k < na.size(); ++k)
                require(na[k] == nb[k], ErrorCode::invalid_argument, "unpaired files " + na[k] + " and " + nb[k]);
        r.parameters()["pooled"] = c->pooled;
        r.parameters()["images"] = a.size();
        r.outputs()["pearson_c"] = content_correlation(a, b, c->pooled);
    });

    struct RavgOpts {
        double rc = 0, rp = 0;
    };
    auto ra = std::make_shared<RavgOpts>();
    auto* ravg = metrics->add_subcommand("ravg", "Average of content and density correlations");
    ravg->add_option("--rc", ra->rc, "Content correlation")->required();
    ravg->add_option("--rp", ra->rp, "Density correlation")->required();
    reg.add(ravg, [ra](Report& r) {
        r.parameters()["rc"] = ra->rc;
        r.parameters()["rp"] = ra->rp;
        r.outputs()["r_avg"] = r_avg(ra->rc, ra->rp);
    });

    struct FidOpts {
        std::string real, gen;
    };
    auto f = std::make_shared<FidOpts>();
    auto* fidc = metrics->add_subcommand("fid", "Frechet distance between Gaussian fits of two feature sets");
    fidc->add_option("--real", f->real, "Real features, one sample per row")->required();
    fidc->add_option("--generated", f->gen, "Generated features, one sample per row")->required();
    reg.add(fidc, [f](Report& r) {
        const Matrix a = load_matrix(r, "real", f->real);
        const Matrix b = load_matrix(r, "generated", f->gen);
        r.outputs()["fid"] = fid(a, b);
    });
}

void register_fixtures(CLI::App& app, Registry& reg) {
    auto* fixtures = app.add_subcommand("fixtures", "Synthetic test data");
    fixtures->require_subcommand(1);
    struct Opts {
        SyntheticSpec spec;
        std::string out_dir;
    };
    auto o = std::make_shared<Opts>();
    auto* make = fixtures->add_subcommand("make", "Write an H&E-like / IHC-like pair and the DAB ground truth");
    make->add_option("--seed", o->spec.seed)->capture_default_str();
    make->add_option("--size", o->spec.size, "Side length in pixels")->capture_default_str();
    make->add_option("--blobs", o->spec.n_blobs)->capture_default_str();
    make->add_option("--positive-fraction", o->spec.positive_fraction)->capture_default_str();
    make->add_option("--out-dir", o->out_dir)->required();
    reg.add(make, [o](Report& r) {
        auto& par = r.parameters();
        par["seed"] = o->spec.seed;
        par["size"] = o->spec.size;
        par["blobs"] = o->spec.n_blobs;
        par["positive_fraction"] = o->spec.positive_fraction;
        const StainPair pair = make_stain_pair(o->spec);
        fs::create_directories(o->out_dir);
        const fs::path dir(o->out_dir);
        io::write_png(pair.he_like, dir / "he_like.png");
        io::write_png(pair.ihc_like, dir / "ihc_like.png");
        io::write_umat(io::od_to_matrix(pair.dab_truth), dir / "dab_truth.umat");
        auto& out = r.outputs();
        out["files"] = {(dir / "he_like.png").generic_string(), (dir / "ihc_like.png").generic_string(),
                        (dir / "dab_truth.umat").generic_string()};
        out["dab_truth_sum"] = pair.dab_truth.sum();
    });
}

void register_defaults(CLI::App& app, Registry& reg) {
    auto* sub = app.add_subcommand("defaults", "Print the default configuration");
    reg.add(sub, [](Report& r) {
        const LossWeights w;
        const SolverConfig s;
        auto& out = r.outputs();
        out["lambda_tcyc"] = w.lambda_tcyc;
        out["lambda_cc"] = w.lambda_cc;
        out["lambda_odc"] = w.lambda_odc;
        out["lambda_nce"] = w.lambda_nce;
        out["lambda_adv"] = w.lambda_adv;
        out["nce_temperature"] = NceConfig{}.temperature;
        out["uot_tau"] = *s.tau;
        out["uot_epsilon"] = s.epsilon;
        out["fod_alpha"] = FodConfig{}.alpha;
    });
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unbalanced transport and stain analytics for virtual staining", "uotkit"};
    app.require_subcommand(1);
    bool timing = false;
    app.add_flag("--timing", timing, "Add wall_time to the report (breaks byte-identical reruns)");

    Registry reg;
    register_uot_solve(app, reg);
    register_oracle(app, reg);
    register_cost_matrix(app, reg);
    register_tcyc(app, reg);
    register_deconv(app, reg);
    register_fod(app, reg);
    register_odc(app, reg);
    register_cc(app, reg);
    register_loss(app, reg);
    register_metrics(app, reg);
    register_fixtures(app, reg);
    register_defaults(app, reg);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        set_thread_limit(parse_thread_env(std::getenv("UOTKIT_THREADS")));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    for (auto& [sub, cmd] : reg.commands) {
        if (!sub->parsed()) continue;
        std::string name = sub->get_name();
        for (const CLI::App* parent = sub->get_parent(); parent && parent->get_parent(); parent = parent->get_parent())
            name = parent->get_name() + " " + name;
        try {
            Report report(name);
            const auto t0 = std::chrono::steady_clock::now();
            cmd(report);
            if (timing) report.wall_time(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            std::ostringstream buf;
            report.emit(buf);
            out << buf.str();
            return exit_ok;
        } catch (const Error& e) {
            err << "uotkit " << name << ": " << e.what() << '\n';
            return is_numerical(e.code()) ? exit_numerical : exit_data;
        } catch (const fs::filesystem_error& e) {
            err << "uotkit " << name << ": io-error: " << e.what() << '\n';
            return exit_data;
        }
    }
    err << app.help();
    return exit_usage;
}

} // namespace uotkit::cli

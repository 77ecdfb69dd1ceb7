#ifndef LLE_TOOLS_CLI_APP_HPP
#define LLE_TOOLS_CLI_APP_HPP

#include "lle/lle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lle::cli {

using Json = nlohmann::ordered_json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;
inline constexpr int schema_version = 1;

struct DatasetSpec {
    std::string name;
    Index n = 800;
    std::uint64_t seed = 0;
    double cap_height = datasets::default_cap_height;
    double height = 21.0;
    double turns = 1.5;

    ManifoldSample generate() const {
        if (name == "punctured_sphere") return datasets::punctured_sphere(n, cap_height, seed);
        if (name == "swiss_roll") return datasets::swiss_roll(n, height, seed);
        if (name == "spiral") return datasets::spiral(n, turns, seed);
        throw ParameterError("unknown dataset '" + name + "'");
    }

    Json to_json() const {
        Json j;
        j["name"] = name;
        j["n"] = n;
        j["seed"] = seed;
        if (name == "punctured_sphere") j["cap_height"] = cap_height;
        if (name == "swiss_roll") j["height"] = height;
        if (name == "spiral") j["turns"] = turns;
        j["rng"] = PortableRng::identity;
        return j;
    }
};

/// Options shared by embed and compare. Exactly one data source is set.
struct RunManifest {
    std::string command;
    std::string input;
    bool has_header = false;
    std::string intrinsic_path;
    DatasetSpec dataset;
    LleConfig config;
    std::optional<double> epsilon;
    std::string metric = "euclidean";
    std::string out;
    bool plot = false;
    bool dump_weights = false;
    Index quality_k = 0;

    bool from_dataset() const { return !dataset.name.empty(); }
};

struct LoadedData {
    DataMatrix data;
    std::optional<Matrix> intrinsic;
};

namespace detail {

inline const std::vector<std::string>& dataset_names() {
    static const std::vector<std::string> names{"spiral", "swiss_roll", "punctured_sphere"};
    return names;
}

inline void add_dataset_params(CLI::App& cmd, DatasetSpec& spec) {
    cmd.add_option("--n", spec.n, "Number of points")->check(CLI::Range(Index{10}, Index{1000000}));
    cmd.add_option("--seed", spec.seed, "Generator seed");
    cmd.add_option("--cap-height", spec.cap_height, "Punctured sphere: removed cap height in (0,2)");
    cmd.add_option("--height", spec.height, "Swiss roll: height of the roll")->check(CLI::PositiveNumber);
    cmd.add_option("--turns", spec.turns, "Spiral: number of turns")->check(CLI::PositiveNumber);
}

inline void add_run_options(CLI::App& cmd, RunManifest& m) {
    auto* input = cmd.add_option("--input", m.input, "Input CSV (one point per row)");
    auto* dataset = cmd.add_option("--dataset", m.dataset.name, "Generate the input instead of reading it")
                        ->check(CLI::IsMember(dataset_names()));
    input->excludes(dataset);
    dataset->excludes(input);
    cmd.add_flag("--header", m.has_header, "Input CSV has a header line");
    cmd.add_option("--intrinsic", m.intrinsic_path, "CSV of ground-truth parameters, row-aligned with --input")
        ->needs(input);
    add_dataset_params(cmd, m.dataset);

    cmd.add_option("--k", m.config.k, "Neighbors per point")->check(CLI::PositiveNumber);
    cmd.add_option("--p", m.config.p, "Embedding dimension")->check(CLI::PositiveNumber);
    cmd.add_option("--metric", m.metric, "euclidean|manhattan|cosine")
        ->check(CLI::IsMember({"euclidean", "manhattan", "cosine"}));
    cmd.add_option("--reg-eps", m.config.reg_eps, "Relative Tikhonov shift of the local Gram matrices")
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--epsilon", m.epsilon, "Use epsilon-ball neighborhoods of this radius, capped at --k")
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--eig-tol", m.config.eig_tol, "Eigenpair residual tolerance")->check(CLI::PositiveNumber);
    cmd.add_option("--threads", m.config.threads, "Worker threads")->check(CLI::Range(1, 256));
    cmd.add_option("--out", m.out, "Output directory")->required();
    cmd.add_flag("--plot", m.plot, "Write an SVG scatter plot");
}

inline void finish_manifest(RunManifest& m) {
    if (m.input.empty() && m.dataset.name.empty()) {
        throw CLI::ValidationError("data source", "one of --input or --dataset is required");
    }
    m.config.metric = parse_metric(m.metric);
    if (m.epsilon) {
        m.config.rule = NeighborRule::epsilon_ball;
        m.config.epsilon = *m.epsilon;
    }
    m.config.seed = m.from_dataset() ? m.dataset.seed : 0;
    if (m.quality_k == 0) {
        m.quality_k = m.config.k;
    }
}

inline LoadedData load(const RunManifest& m) {
    if (m.from_dataset()) {
        ManifoldSample sample = m.dataset.generate();
        return {std::move(sample.data), std::move(sample.intrinsic)};
    }
    LoadedData loaded{load_csv(m.input, m.has_header), std::nullopt};
    if (!m.intrinsic_path.empty()) {
        loaded.intrinsic = io::read_csv_matrix(m.intrinsic_path, m.has_header);
        if (loaded.intrinsic->rows() != loaded.data.n()) {
            throw FormatError(m.intrinsic_path + ": row count does not match the input");
        }
    }
    return loaded;
}

inline Json source_json(const RunManifest& m) {
    Json j;
    if (m.from_dataset()) {
        j["dataset"] = m.dataset.to_json();
    } else {
        j["input"] = m.input;
        if (!m.intrinsic_path.empty()) j["intrinsic"] = m.intrinsic_path;
    }
    return j;
}

/// Configuration echo. Thread count is omitted so reports do not depend on it.
inline Json config_json(const LleConfig& c, double zero_tol) {
    Json j;
    j["k"] = c.k;
    j["p"] = c.p;
    j["metric"] = std::string(to_string(c.metric));
    j["neighbor_rule"] = c.rule == NeighborRule::fixed_k ? "fixed_k" : "epsilon_ball";
    if (c.rule == NeighborRule::epsilon_ball) j["epsilon"] = c.epsilon;
    j["reg_eps"] = c.reg_eps;
    j["eig_tol"] = c.eig_tol;
    j["zero_tol"] = zero_tol;
    j["seed"] = c.seed;
    return j;
}

inline Json vector_json(const Vector& v) {
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Json quality_json(const QualityReport& q) {
    Json j;
    j["phi"] = q.phi ? Json(*q.phi) : Json(nullptr);
    j["trustworthiness"] = q.trustworthiness;
    j["continuity"] = q.continuity;
    j["neighbor_overlap"] = q.neighbor_overlap;
    j["spearman_intrinsic"] = q.spearman_intrinsic ? Json(*q.spearman_intrinsic) : Json(nullptr);
    return j;
}

/// Column-mean and (1/n) Y^T Y - I deviations of an embedding.
inline Json embedding_checks(const Matrix& y) {
    const double n = static_cast<double>(y.rows());
    const double mean_dev = y.colwise().mean().cwiseAbs().maxCoeff();
    const Matrix gram = (y.transpose() * y) / n;
    const double cov_dev = (gram - Matrix::Identity(y.cols(), y.cols())).cwiseAbs().maxCoeff();
    Json j;
    j["column_mean_max_abs"] = mean_dev;
    j["covariance_identity_max_dev"] = cov_dev;
    return j;
}

inline Json lle_json(const LleResult& r) {
    const Embedding& e = r.embedding;
    Json j;
    j["eigenvalues"] = vector_json(e.eigenvalues);
    j["dropped_eigenvalue"] = e.dropped_eigenvalue;
    j["phi"] = embedding_cost(e.y, r.weights);
    j["phi_from_eigenvalues"] = static_cast<double>(e.y.rows()) * e.eigenvalues.sum();
    j["row_sum_max_dev"] = r.weights.row_sum_max_dev();
    j["diagonal_max_abs"] = r.weights.diagonal_max_abs();
    j["max_eig_residual"] = r.max_residual;
    j["regularization_flagged_points"] = r.weights.regularization_flagged();
    j["embedding_checks"] = embedding_checks(e.y);
    Json warnings = Json::array();
    for (const auto& w : e.warnings) warnings.push_back(w);
    j["warnings"] = warnings;
    return j;
}

inline Json timing_json(const StageTimings& t, double wall) {
    Json j;
    j["schema_version"] = schema_version;
    j["wall_time_seconds"] = wall;
    j["stages"] = {{"knn", t.knn}, {"weights", t.weights}, {"alignment", t.alignment}, {"eig", t.eig}};
    return j;
}

inline void write_json(const std::filesystem::path& path, const Json& j) { io::write_file(path, j.dump(2) + "\n"); }

inline std::filesystem::path prepare_out(const std::string& out) {
    std::filesystem::path dir(out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + out + "': " + ec.message());
    }
    return dir;
}

inline std::optional<Vector> color_of(const LoadedData& d) {
    if (d.intrinsic && d.intrinsic->cols() >= 1) {
        return Vector(d.intrinsic->col(0));
    }
    return std::nullopt;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace detail

inline void cmd_generate(const DatasetSpec& spec, const std::string& out) {
    const ManifoldSample sample = spec.generate();
    const auto dir = detail::prepare_out(out);
    save_matrix(sample.data.points(), dir / "data.csv");
    save_matrix(sample.intrinsic, dir / "intrinsic.csv");
    Json manifest;
    manifest["schema_version"] = schema_version;
    manifest["command"] = "generate";
    manifest["dataset"] = spec.to_json();
    manifest["rows"] = sample.data.n();
    manifest["columns"] = sample.data.d();
    manifest["intrinsic_columns"] = sample.intrinsic.cols();
    detail::write_json(dir / "manifest.json", manifest);
}

inline void cmd_embed(const RunManifest& m) {
    const auto start = std::chrono::steady_clock::now();
    const LoadedData loaded = detail::load(m);
    m.config.validate(loaded.data.n());
    const LleResult r = lle_fit(loaded.data, m.config);

    const auto dir = detail::prepare_out(m.out);
    save_matrix(r.embedding.y, dir / "embedding.csv");

    Json report;
    report["schema_version"] = schema_version;
    report["command"] = "embed";
    report["source"] = detail::source_json(m);
    report["n"] = loaded.data.n();
    report["d"] = loaded.data.d();
    report["config"] = detail::config_json(m.config, r.embedding.zero_tol);
    const Json lle_fields = detail::lle_json(r);
    for (const auto& [key, value] : lle_fields.items()) {
        report[key] = value;
    }
    detail::write_json(dir / "report.json", report);

    if (m.dump_weights) {
        io::write_file(dir / "weights.coo.txt", r.weights.to_coo_text());
    }
    if (m.plot) {
        io::write_file(dir / "plot.svg", svg::render({{"LLE (k=" + std::to_string(m.config.k) + ")", r.embedding.y,
                                                       detail::color_of(loaded)}}));
    }
    detail::write_json(dir / "timing.json", detail::timing_json(r.timings, detail::seconds_since(start)));
}

inline void cmd_compare(const RunManifest& m) {
    const auto start = std::chrono::steady_clock::now();
    const LoadedData loaded = detail::load(m);
    m.config.validate(loaded.data.n());
    const LleResult r = lle_fit(loaded.data, m.config);

    Matrix pca_y;
    PcaModel pca;
    try {
        pca = pca_fit(loaded.data, m.config.p);
        pca_y = pca_transform(pca, loaded.data.points());
    } catch (Error& e) {
        e.set_stage("pca");
        throw;
    }

    const Matrix* intrinsic = loaded.intrinsic ? &*loaded.intrinsic : nullptr;
    QualityReport lle_q;
    QualityReport pca_q;
    try {
        lle_q = quality_report(loaded.data, r.embedding.y, m.quality_k, intrinsic, &r.weights);
        pca_q = quality_report(loaded.data, pca_y, m.quality_k, intrinsic, &r.weights);
    } catch (Error& e) {
        e.set_stage("evaluation");
        throw;
    }

    const auto dir = detail::prepare_out(m.out);
    save_matrix(r.embedding.y, dir / "lle.csv");
    save_matrix(pca_y, dir / "pca.csv");

    Json report;
    report["schema_version"] = schema_version;
    report["command"] = "compare";
    report["source"] = detail::source_json(m);
    report["n"] = loaded.data.n();
    report["d"] = loaded.data.d();
    report["config"] = detail::config_json(m.config, r.embedding.zero_tol);
    report["quality_k"] = m.quality_k;
    Json lle = detail::quality_json(lle_q);
    const Json lle_fields = detail::lle_json(r);
    for (const auto& [key, value] : lle_fields.items()) {
        if (key != "phi") lle[key] = value;
    }
    report["lle"] = lle;
    Json pca_j = detail::quality_json(pca_q);
    pca_j["explained_variance"] = detail::vector_json(pca.explained_variance);
    report["pca"] = pca_j;
    detail::write_json(dir / "compare.json", report);

    if (m.plot) {
        const auto color = detail::color_of(loaded);
        io::write_file(dir / "plot.svg",
                       svg::render({{"PCA", pca_y, color}, {"LLE (k=" + std::to_string(m.config.k) + ")", r.embedding.y, color}}));
    }
    detail::write_json(dir / "timing.json", detail::timing_json(r.timings, detail::seconds_since(start)));
}

struct BenchOptions {
    std::vector<Index> sizes{100, 200, 400};
    Index k = 12;
    Index p = 2;
    int repetitions = 3;
    std::string dataset = "swiss_roll";
    std::uint64_t seed = 0;
    std::string out;
};

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

/// Per-size median stage timings as CSV. Sizes where k >= n become "skipped" rows.
inline std::string cmd_bench(const BenchOptions& o, std::ostream& err) {
    std::string csv = "n,status,knn_s,weights_s,alignment_s,eig_s,total_s\n";
    for (Index n : o.sizes) {
        if (o.k >= n || o.p >= n) {
            err << "warning: skipping n=" << n << " (k=" << o.k << " needs k < n)\n";
            csv += std::to_string(n) + ",skipped,,,,,\n";
            continue;
        }
        DatasetSpec spec;
        spec.name = o.dataset;
        spec.n = n;
        spec.seed = o.seed;
        const ManifoldSample sample = spec.generate();
        LleConfig config;
        config.k = o.k;
        config.p = o.p;
        std::vector<double> knn, weights, alignment, eig, total;
        for (int rep = 0; rep < o.repetitions; ++rep) {
            const LleResult r = lle_fit(sample.data, config);
            knn.push_back(r.timings.knn);
            weights.push_back(r.timings.weights);
            alignment.push_back(r.timings.alignment);
            eig.push_back(r.timings.eig);
            total.push_back(r.timings.total());
        }
        csv += std::to_string(n) + ",ok," + io::format_double(median(knn)) + ',' + io::format_double(median(weights)) + ',' +
               io::format_double(median(alignment)) + ',' + io::format_double(median(eig)) + ',' +
               io::format_double(median(total)) + '\n';
    }
    return csv;
}

/* Entry point shared by the executable and the tests.
 * Exit codes: 0 success, 1 runtime/numerical failure, 2 usage error. */
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Locally linear embedding toolkit", "lle"};
    app.require_subcommand(1);

    DatasetSpec gen_spec;
    std::string gen_out;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic manifold sample");
    generate->add_option("name", gen_spec.name, "spiral|swiss_roll|punctured_sphere")
        ->required()
        ->check(CLI::IsMember(detail::dataset_names()));
    detail::add_dataset_params(*generate, gen_spec);
    generate->add_option("--out", gen_out, "Output directory")->required();

    RunManifest embed_m;
    embed_m.command = "embed";
    auto* embed = app.add_subcommand("embed", "Run LLE and write the embedding and a JSON report");
    detail::add_run_options(*embed, embed_m);
    embed->add_flag("--dump-weights", embed_m.dump_weights, "Write W as 'row col value' lines");

    RunManifest compare_m;
    compare_m.command = "compare";
    auto* compare = app.add_subcommand("compare", "Run LLE and PCA on the same data and compare quality");
    detail::add_run_options(*compare, compare_m);
    compare->add_option("--quality-k", compare_m.quality_k, "Neighborhood size for quality metrics (default: --k)")
        ->check(CLI::PositiveNumber);

    BenchOptions bench_o;
    auto* bench = app.add_subcommand("bench", "Time each pipeline stage across input sizes");
    bench->add_option("--sizes", bench_o.sizes, "Comma-separated point counts (each >= 50)")
        ->delimiter(',')
        ->check(CLI::Range(Index{50}, Index{100000}));
    bench->add_option("--k", bench_o.k, "Neighbors per point")->check(CLI::PositiveNumber);
    bench->add_option("--p", bench_o.p, "Embedding dimension")->check(CLI::PositiveNumber);
    bench->add_option("--repetitions", bench_o.repetitions, "Runs per size; the median is reported")
        ->check(CLI::Range(1, 1000));
    bench->add_option("--dataset", bench_o.dataset, "Benchmark manifold")->check(CLI::IsMember(detail::dataset_names()));
    bench->add_option("--seed", bench_o.seed, "Generator seed");
    bench->add_option("--out", bench_o.out, "Write the CSV table here instead of stdout");

    try {
        app.parse(argc, argv);
        if (*embed) detail::finish_manifest(embed_m);
        if (*compare) detail::finish_manifest(compare_m);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        const CLI::App* sub = nullptr;
        for (const auto* s : app.get_subcommands()) sub = s;
        err << (sub != nullptr ? sub->help() : app.help());
        return exit_usage;
    } catch (const ParameterError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (*generate) {
            cmd_generate(gen_spec, gen_out);
        } else if (*embed) {
            cmd_embed(embed_m);
        } else if (*compare) {
            cmd_compare(compare_m);
        } else if (*bench) {
            const std::string table = cmd_bench(bench_o, err);
            if (bench_o.out.empty()) {
                out << table;
            } else {
                io::write_file(bench_o.out, table);
            }
        }
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        err << "error" << (e.stage().empty() ? "" : " [" + e.stage() + "]") << ": " << e.what() << "\n";
        return exit_runtime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_ok;
}

} // namespace lle::cli

#endif

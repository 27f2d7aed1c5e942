// ambirot command-line front end: synthetic data generation, estimators,
// hypothesis tests, regression, misorientation and stereonet plots.
//
// Exit codes: 0 success, 1 statistical degeneracy, 2 usage or input errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ambirot/ambirot.hpp"
#include "ambirot/io.hpp"

namespace {

using namespace ambirot;

Quat parse_quat(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    if (v.size() != 4) throw CLI::ValidationError("--mode/--m0 expects w,x,y,z");
    return Quat{v[0], v[1], v[2], v[3]}.normalized();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + out_path);
    os << text;
}

void emit_json(const ordered_json& j, const std::string& out_path) {
    emit(j.dump(2) + "\n", out_path);
}

GroupPtr resolve_group(const DatasetFile& d, const std::string& flag) {
    if (!flag.empty() && flag != d.group->name())
        throw CLI::ValidationError("--group " + flag + " does not match dataset group " +
                                   d.group->name());
    return d.group;
}

struct CommonOpts {
    std::string group;
    std::string out;
    uint64_t seed = 0;
    int replicates = 999;
    std::string format = "quaternion";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_replicates = true) {
    cmd->add_option("--group", o.group, "symmetry group tag (C1, C2, ..., D2, ..., T, O, Y)");
    cmd->add_option("--out", o.out, "output path (default stdout)");
    cmd->add_option("--seed", o.seed, "random seed")->default_val(0);
    if (with_replicates)
        cmd->add_option("--replicates,-B", o.replicates, "randomization replicates")
            ->default_val(999);
    cmd->add_option("--format", o.format, "dataset format for generated files")
        ->check(CLI::IsMember({"quaternion", "matrix"}));
}

int run(int argc, char** argv) {
    CLI::App app{"statistics of ambiguous rotations on SO(3)/K"};
    app.require_subcommand(1);

    // --- gen ---------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    CommonOpts gen_o;
    add_common(gen, gen_o, false);
    std::string gen_family = "uniform", gen_mode = "1,0,0,0";
    double gen_kappa = 0;
    int gen_n = 100;
    gen->add_option("--family", gen_family, "uniform | watson | dlvp | cardioid")
        ->check(CLI::IsMember({"uniform", "watson", "dlvp", "cardioid"}));
    gen->add_option("--kappa", gen_kappa, "concentration");
    gen->add_option("--mode", gen_mode, "mode quaternion w,x,y,z");
    gen->add_option("-n", gen_n, "sample size")->required();

    // --- mean / disp ---------------------------------------------------------
    auto* mean_cmd = app.add_subcommand("mean", "sample mean and dispersion summary");
    CommonOpts mean_o;
    std::string mean_in;
    add_common(mean_cmd, mean_o, false);
    mean_cmd->add_option("input", mean_in, "dataset file")->required();

    auto* disp_cmd = app.add_subcommand("disp", "dispersion of a sample");
    CommonOpts disp_o;
    std::string disp_in;
    add_common(disp_cmd, disp_o, false);
    disp_cmd->add_option("input", disp_in, "dataset file")->required();

    // --- test-uniformity -----------------------------------------------------
    auto* uni = app.add_subcommand("test-uniformity", "test uniformity of a sample");
    CommonOpts uni_o;
    std::string uni_in, uni_mode = "randomization", uni_stat = "S";
    add_common(uni, uni_o);
    uni->add_option("input", uni_in, "dataset file")->required();
    uni->add_option("--mode", uni_mode, "asymptotic | randomization")
        ->check(CLI::IsMember({"asymptotic", "randomization"}));
    uni->add_option("--statistic", uni_stat, "S | TG")->check(CLI::IsMember({"S", "TG"}));

    // --- test-location ---------------------------------------------------------
    auto* loc = app.add_subcommand("test-location", "one-sample location test");
    CommonOpts loc_o;
    std::string loc_in, loc_m0 = "1,0,0,0", loc_method = "randomization";
    add_common(loc, loc_o);
    loc->add_option("input", loc_in, "dataset file")->required();
    loc->add_option("--m0", loc_m0, "hypothesized location quaternion w,x,y,z");
    loc->add_option("--method", loc_method, "randomization | hotelling")
        ->check(CLI::IsMember({"randomization", "hotelling"}));

    // --- test-two-sample --------------------------------------------------------
    auto* two = app.add_subcommand("test-two-sample", "two-sample location test");
    CommonOpts two_o;
    std::string two_in1, two_in2, two_method = "permutation";
    add_common(two, two_o);
    two->add_option("input1", two_in1, "first dataset")->required();
    two->add_option("input2", two_in2, "second dataset")->required();
    two->add_option("--method", two_method, "permutation | hotelling")
        ->check(CLI::IsMember({"permutation", "hotelling"}));

    // --- test-independence -------------------------------------------------------
    auto* ind = app.add_subcommand("test-independence", "independence test on paired data");
    CommonOpts ind_o;
    std::string ind_in;
    int ind_L = 4;
    add_common(ind, ind_o);
    ind->add_option("input", ind_in, "paired dataset file")->required();
    ind->add_option("--band-limit,-L", ind_L, "averaged-embedding level for mixed groups");

    // --- fit -------------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "fit a parametric family");
    CommonOpts fit_o;
    std::string fit_in, fit_family = "watson";
    double fit_kappa_max = 64;
    add_common(fit_cmd, fit_o, false);
    fit_cmd->add_option("input", fit_in, "dataset file")->required();
    fit_cmd->add_option("--family", fit_family, "watson | cardioid")
        ->check(CLI::IsMember({"watson", "cardioid"}));
    fit_cmd->add_option("--kappa-max", fit_kappa_max, "upper bound for the likelihood search");

    // --- regress -----------------------------------------------------------------
    auto* reg = app.add_subcommand("regress", "fit the rotation link model V = [A U]");
    CommonOpts reg_o;
    std::string reg_in;
    int reg_L = 4, reg_grid = 10000;
    add_common(reg, reg_o, false);
    reg->add_option("input", reg_in, "paired dataset file")->required();
    reg->add_option("--band-limit,-L", reg_L, "averaged-embedding level for mixed groups");
    reg->add_option("--grid", reg_grid, "optimizer net size");

    // --- misorient -----------------------------------------------------------------
    auto* mis = app.add_subcommand("misorient", "misorientation of paired data");
    CommonOpts mis_o;
    std::string mis_in;
    bool mis_alt = false;
    add_common(mis, mis_o, false);
    mis->add_option("input", mis_in, "paired dataset file")->required();
    mis->add_flag("--alt", mis_alt, "also compute the alternating-definition mean");

    // --- plot ------------------------------------------------------------------------
    auto* plot = app.add_subcommand("plot", "stereonet SVG of a C2 sample");
    CommonOpts plot_o;
    std::string plot_in;
    add_common(plot, plot_o, false);
    plot->add_option("input", plot_in, "dataset file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    if (gen->parsed()) {
        GroupPtr g = SymmetryGroup::parse(gen_o.group.empty() ? "C1" : gen_o.group);
        Quat mq = parse_quat(gen_mode);
        AmbiguousRotation mode{Rotation(mq), g};
        std::vector<AmbiguousRotation> draws;
        if (gen_family == "uniform") {
            DistributionSpec spec{Family::Cardioid, mode, 0.0};
            draws = sample(spec, gen_n, gen_o.seed);
        } else {
            DistributionSpec spec{parse_family(gen_family), mode, gen_kappa};
            spec.validate();
            draws = sample(spec, gen_n, gen_o.seed);
        }
        DatasetFile d = make_dataset(
            draws, parse_format(gen_o.format),
            {{"family", gen_family},
             {"kappa", detail::format_double(gen_kappa)},
             {"mode", detail::format_double(mq.w) + "," + detail::format_double(mq.x) + "," +
                          detail::format_double(mq.y) + "," + detail::format_double(mq.z)},
             {"seed", std::to_string(gen_o.seed)}});
        std::ostringstream os;
        write_dataset(os, d);
        emit(os.str(), gen_o.out);
        return 0;
    }
    if (mean_cmd->parsed()) {
        DatasetFile d = read_dataset(mean_in, &std::cerr);
        resolve_group(d, mean_o.group);
        emit_json(to_json(summarize(ingest(d))), mean_o.out);
        return 0;
    }
    if (disp_cmd->parsed()) {
        DatasetFile d = read_dataset(disp_in, &std::cerr);
        resolve_group(d, disp_o.group);
        ordered_json j;
        j["n"] = d.rows.size();
        j["group"] = d.group->name();
        j["dispersion"] = dispersion(ingest(d));
        j["rho2"] = rho_squared(*d.group);
        emit_json(j, disp_o.out);
        return 0;
    }
    if (uni->parsed()) {
        DatasetFile d = read_dataset(uni_in, &std::cerr);
        resolve_group(d, uni_o.group);
        auto data = ingest(d);
        TestReport r;
        if (uni_stat == "TG")
            r = gine_TG(data, uni_o.replicates, uni_o.seed);
        else
            r = uniformity_S(data,
                             uni_mode == "asymptotic" ? UniformityMode::Asymptotic
                                                      : UniformityMode::Randomization,
                             uni_o.replicates, uni_o.seed);
        emit_json(to_json(r), uni_o.out);
        return 0;
    }
    if (loc->parsed()) {
        DatasetFile d = read_dataset(loc_in, &std::cerr);
        resolve_group(d, loc_o.group);
        auto data = ingest(d);
        AmbiguousRotation m0{Rotation(parse_quat(loc_m0)), d.group};
        TestReport r = (loc_method == "hotelling")
                           ? one_sample_hotelling(data, m0)
                           : one_sample_location_randomization(data, m0, loc_o.replicates,
                                                               loc_o.seed);
        emit_json(to_json(r), loc_o.out);
        return 0;
    }
    if (two->parsed()) {
        DatasetFile d1 = read_dataset(two_in1, &std::cerr);
        DatasetFile d2 = read_dataset(two_in2, &std::cerr);
        resolve_group(d1, two_o.group);
        if (d1.group->name() != d2.group->name())
            throw CLI::ValidationError("two-sample test requires one common group");
        auto s1 = ingest(d1), s2 = ingest(d2);
        TestReport r = (two_method == "hotelling")
                           ? two_sample_hotelling(s1, s2)
                           : two_sample_test(s1, s2, two_o.replicates, two_o.seed);
        emit_json(to_json(r), two_o.out);
        return 0;
    }
    if (ind->parsed()) {
        DatasetFile d = read_dataset(ind_in, &std::cerr);
        auto pairs = ingest_pairs(d);
        std::vector<AmbiguousRotation> u, v;
        for (auto& [a, b] : pairs) {
            u.push_back(a);
            v.push_back(b);
        }
        emit_json(to_json(independence_test(u, v, ind_o.replicates, ind_o.seed, ind_L)), ind_o.out);
        return 0;
    }
    if (fit_cmd->parsed()) {
        DatasetFile d = read_dataset(fit_in, &std::cerr);
        resolve_group(d, fit_o.group);
        auto data = ingest(d);
        ordered_json j;
        if (fit_family == "cardioid") {
            CardioidEstimate est = cardioid_moment_estimates(data);
            j["family"] = "cardioid";
            j["mode"] = quat_json(est.mode.rep);
            j["kappa"] = est.kappa;
            j["clamped"] = est.clamped;
            j["mode_unique"] = est.mode_unique;
        } else {
            WatsonFit f = fit_watson(data, fit_kappa_max);
            j["family"] = "watson";
            j["mode"] = quat_json(f.mode.rep);
            j["kappa"] = f.kappa;
            j["kappa_at_bound"] = f.kappa_at_bound;
            j["mode_unique"] = f.mode_unique;
        }
        j["group"] = d.group->name();
        j["n"] = data.size();
        emit_json(j, fit_o.out);
        return 0;
    }
    if (reg->parsed()) {
        DatasetFile d = read_dataset(reg_in, &std::cerr);
        RegressionConfig cfg;
        cfg.band_limit = reg_L;
        cfg.grid_size = reg_grid;
        RegressionFit f = fit_regression(ingest_pairs(d), cfg);
        emit_json(to_json(f), reg_o.out);
        return 0;
    }
    if (mis->parsed()) {
        DatasetFile d = read_dataset(mis_in, &std::cerr);
        auto pairs = ingest_pairs(d);
        ordered_json j;
        ordered_json per = ordered_json::array();
        for (const auto& [u, v] : pairs) per.push_back(to_json(misorientation(u, v)));
        j["pairs"] = per;
        j["mean_misorientation"] = quat_json(mean_misorientation(pairs));
        if (mis_alt) {
            auto alt = mean_misorientation_alt(pairs);
            j["alternative_mean"] = {{"a1", quat_json(alt.a1)},
                                     {"a2", quat_json(alt.a2)},
                                     {"objective", alt.objective},
                                     {"starts_agreeing", alt.starts_agreeing}};
        }
        emit_json(j, mis_o.out);
        return 0;
    }
    if (plot->parsed()) {
        DatasetFile d = read_dataset(plot_in, &std::cerr);
        resolve_group(d, plot_o.group);
        auto data = ingest(d);
        AmbiguousRotation mean = sample_mean(data);
        emit(render_stereonet(data, mean), plot_o.out);
        return 0;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ambirot::degeneracy_error& e) {
        std::cerr << "degenerate input: " << e.what() << "\n";
        return 1;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return e.get_name() == "CallForHelp" ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

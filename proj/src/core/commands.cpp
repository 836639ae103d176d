#include "kdg/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kdg/binary_io.hpp"

namespace fs = std::filesystem;

namespace kdg {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& p, const std::string& s) {
    bin::write_file(p, std::vector<std::uint8_t>(s.begin(), s.end()));
}

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<Sample> load_dataset(const std::string& path) {
    if (!fs::exists(path)) throw MissingArtifact("dataset not found: " + path + " (run gen-data first)");
    return read_dataset(path);
}

std::string metrics_csv(const std::vector<EpochMetrics>& rows) {
    std::string s = "epoch,mean_loss,val_psnr,gap,lr,noise_strength\n";
    for (const auto& m : rows)
        s += std::to_string(m.epoch) + "," + num(m.mean_loss) + "," + num(m.val_psnr) + "," + std::to_string(m.gap) +
             "," + num(m.lr) + "," + num(m.noise_strength) + "\n";
    return s;
}

std::string noise_log_csv(const std::vector<NoiseLogRow>& rows) {
    std::string s = "epoch,sample,applied,kind,strength\n";
    for (const auto& r : rows)
        s += std::to_string(r.epoch) + "," + std::to_string(r.sample) + "," + (r.applied ? "1" : "0") + "," +
             std::string(noise_kind_name(r.kind)) + "," + num(r.strength) + "\n";
    return s;
}

void write_pattern(const fs::path& dir, const SamplingPattern& p) {
    if (const auto* m = std::get_if<CartesianMask>(&p))
        write_mask_txt(dir / "mask.txt", *m);
    else
        write_trajectory_csv(dir / "trajectory.csv", std::get<RadialTrajectory>(p));
}

Domain domain_arg(const std::string& s) {
    try {
        return parse_domain(s);
    } catch (const Error&) {
        throw ConfigError("unknown domain '" + s + "'");
    }
}

}  // namespace

GenDataResult cmd_gen_data(const RunConfig& config, std::ostream& log) {
    config.validate();
    GenDataResult r{config.source_path(), config.target_path(), fs::path(config.out) / "manifest.json"};
    fs::create_directories(config.out);

    nlohmann::json manifest;
    manifest["seed"] = config.seed;
    manifest["size"] = config.data.size;
    auto one = [&](Domain d, int count, const fs::path& path, std::uint32_t first_id) {
        const auto samples = generate_dataset(config.data.phantom(d), count, config.seed, first_id);
        const auto bytes = encode_dataset(samples);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        bin::write_file(path, bytes);
        manifest[std::string(domain_name(d))] = {
            {"path", path.string()}, {"count", count}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}};
        log << "wrote " << count << " " << domain_name(d) << " samples to " << path.string() << "\n";
    };
    one(Domain::Source, config.data.n_source, r.source, 0);
    // Target ids continue after the source ids so the two never collide.
    one(Domain::Target, config.data.n_target, r.target, static_cast<std::uint32_t>(config.data.n_source));
    write_text(r.manifest, manifest.dump(2) + "\n");
    return r;
}

ModelTag model_tag(const TrainConfig& t) { return {t.sampling, t.trajectory_learning, t.noise.kind}; }

fs::path run_dir(const RunConfig& config) { return fs::path(config.out) / "runs" / model_tag(config.train).name(); }

std::vector<RunConfig> expand_grid(const RunConfig& base) {
    std::vector<RunConfig> out;
    for (Sampling s : {Sampling::Cartesian, Sampling::Radial})
        for (bool tl : {false, true})
            for (NoiseKind k :
                 {NoiseKind::None, NoiseKind::Image, NoiseKind::Trajectory, NoiseKind::TrajectoryAdversarial}) {
                RunConfig c = base;
                c.train.sampling = s;
                c.train.trajectory_learning = tl;
                c.train.noise.kind = k;
                out.push_back(std::move(c));
            }
    return out;
}

std::vector<fs::path> cmd_train(const RunConfig& config, bool grid, std::ostream& log) {
    config.validate();
    const auto dataset = load_dataset(config.source_path());
    const std::vector<RunConfig> runs = grid ? expand_grid(config) : std::vector<RunConfig>{config};
    std::vector<fs::path> dirs;
    for (const RunConfig& rc : runs) {
        const fs::path dir = run_dir(rc);
        fs::create_directories(dir);
        TrainConfig tc = rc.train;
        tc.noise = rc.effective_noise();
        const std::string name = model_tag(tc).name();
        log << "training " << name << " on " << dataset.size() << " samples for " << tc.epochs << " epochs\n";
        const TrainResult res = train(tc, dataset, [&](const EpochMetrics& m) {
            log << "  " << name << " epoch " << m.epoch << " loss " << m.mean_loss << " val_psnr " << m.val_psnr
                << "\n";
        });
        write_text(dir / "config.json", to_json(rc));
        save_checkpoint(dir / "checkpoint.kdgw", res.final_state.params);
        write_text(dir / "metrics.csv", metrics_csv(res.metrics));
        write_text(dir / "noise_log.csv", noise_log_csv(res.noise_log));
        write_pattern(dir, res.final_state.pattern);
        dirs.push_back(dir);
    }
    return dirs;
}

TrainedModel load_run(const fs::path& dir) {
    const fs::path cfg = dir / "config.json", ckpt = dir / "checkpoint.kdgw";
    if (!fs::exists(cfg)) throw MissingArtifact("missing " + cfg.string());
    if (!fs::exists(ckpt)) throw MissingArtifact("missing checkpoint " + ckpt.string());
    const RunConfig rc = load_run_config(cfg.string());
    TrainedModel m;
    m.tag = model_tag(rc.train);
    m.name = m.tag.name();
    m.params = load_checkpoint(ckpt);
    if (!(m.params.config == rc.train.model)) throw Error("checkpoint architecture does not match " + cfg.string());
    if (rc.train.sampling == Sampling::Cartesian) {
        if (!fs::exists(dir / "mask.txt")) throw MissingArtifact("missing " + (dir / "mask.txt").string());
        m.pattern = read_mask_txt(dir / "mask.txt");
    } else {
        if (!fs::exists(dir / "trajectory.csv")) throw MissingArtifact("missing " + (dir / "trajectory.csv").string());
        m.pattern = read_trajectory_csv(dir / "trajectory.csv");
    }
    return m;
}

std::vector<fs::path> find_runs(const RunConfig& config) {
    std::vector<fs::path> out;
    const fs::path root = fs::path(config.out) / "runs";
    if (!fs::is_directory(root)) return out;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "checkpoint.kdgw")) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::vector<fs::path> selected_runs(const RunConfig& config, const std::vector<std::string>& listed) {
    std::vector<fs::path> dirs;
    for (const auto& r : listed) dirs.emplace_back(r);
    if (dirs.empty()) dirs = find_runs(config);
    if (dirs.empty()) throw MissingArtifact("no trained runs under " + (fs::path(config.out) / "runs").string());
    return dirs;
}

std::vector<Sample> domain_samples(const RunConfig& config, Domain d) {
    return load_dataset(d == Domain::Source ? config.source_path() : config.target_path());
}

}  // namespace

CrossDomainReport cmd_eval(const RunConfig& config, std::ostream& log) {
    config.validate();
    std::vector<TrainedModel> models;
    for (const auto& d : selected_runs(config, config.eval.runs)) models.push_back(load_run(d));

    std::vector<std::vector<Sample>> data;
    std::vector<DomainSet> sets;
    for (const auto& name : config.eval.domains) {
        auto s = domain_samples(config, domain_arg(name));
        if (config.eval.max_samples > 0 && s.size() > static_cast<std::size_t>(config.eval.max_samples))
            s.resize(static_cast<std::size_t>(config.eval.max_samples));
        if (s.empty()) throw MissingArtifact("dataset for domain " + name + " is empty");
        data.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < data.size(); ++i) sets.push_back({domain_arg(config.eval.domains[i]), data[i]});

    CrossDomainReport rep = cross_domain_matrix(models, sets);
    const fs::path dir = fs::path(config.out) / "eval";
    fs::create_directories(dir);
    write_text(dir / "matrix.csv", matrix_csv(rep.cells));
    // One paired table per family and domain, keeping the fixed CSV columns.
    for (const auto& set : sets) {
        auto pick = [&](const std::vector<PairedEvalReport>& all) {
            std::vector<PairedEvalReport> v;
            for (const auto& p : all)
                if (p.domain == set.domain) v.push_back(p);
            return v;
        };
        const std::string d(domain_name(set.domain));
        write_text(dir / ("paired_tl_" + d + ".csv"), paired_csv(pick(rep.tl_pairs)));
        write_text(dir / ("paired_noise_" + d + ".csv"), paired_csv(pick(rep.noise_pairs)));
    }
    write_text(dir / "records.csv", records_csv(rep.records));
    log << "evaluated " << models.size() << " models on " << sets.size() << " domains; results in " << dir.string()
        << "\n";
    return rep;
}

std::vector<fs::path> cmd_export(const RunConfig& config, std::ostream& log) {
    config.validate();
    const auto samples = domain_samples(config, domain_arg(config.export_.domain));
    std::vector<const Sample*> chosen;
    if (config.export_.sample_ids.empty()) {
        const std::size_t n = std::min<std::size_t>(samples.size(), static_cast<std::size_t>(config.export_.count));
        for (std::size_t i = 0; i < n; ++i) chosen.push_back(&samples[i]);
    } else {
        for (auto id : config.export_.sample_ids) {
            const auto it = std::find_if(samples.begin(), samples.end(), [&](const Sample& s) { return s.id == id; });
            if (it == samples.end()) throw MissingArtifact("sample id " + std::to_string(id) + " not in dataset");
            chosen.push_back(&*it);
        }
    }

    std::vector<fs::path> written;
    for (const auto& dir : selected_runs(config, config.export_.runs)) {
        const TrainedModel m = load_run(dir);
        for (const Sample* s : chosen) {
            const Acquired a = acquire(s->gt, m.pattern);
            const std::string id = std::to_string(s->id);
            const fs::path in = dir / (id + "_input.pgm"), rec = dir / (id + "_recon.pgm"), gt = dir / (id + "_gt.pgm");
            write_pgm16(in, a.net_input);
            write_pgm16(rec, forward(m.params, a.net_input));
            write_pgm16(gt, s->gt);
            written.insert(written.end(), {in, rec, gt});
        }
        write_pattern(dir, m.pattern);
        written.push_back(std::holds_alternative<CartesianMask>(m.pattern) ? dir / "mask.txt" : dir / "trajectory.csv");
        log << "exported " << chosen.size() << " samples for " << dir.string() << "\n";
    }
    return written;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"k-space trajectory learning and domain-generalization experiments", "kdg"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool grid = false;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run config");
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "override the output directory");
    };
    auto* gen = app.add_subcommand("gen-data", "generate source and target phantom datasets");
    auto* tr = app.add_subcommand("train", "train one model, or the 16-run grid");
    auto* ev = app.add_subcommand("eval", "evaluate trained runs on both domains");
    auto* ex = app.add_subcommand("export", "write PGM images and trajectories for trained runs");
    for (auto* s : {gen, tr, ev, ex}) common(s);
    tr->add_flag("--grid", grid, "train all 2 x 2 x 4 sampling/TL/noise combinations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (seed) cfg.seed = *seed;
        cfg.train.seed = cfg.seed;
        if (out_dir) cfg.out = *out_dir;
        cfg.validate();

        if (gen->parsed())
            cmd_gen_data(cfg, out);
        else if (tr->parsed())
            cmd_train(cfg, grid, out);
        else if (ev->parsed())
            cmd_eval(cfg, out);
        else
            cmd_export(cfg, out);
        return kExitOk;
    } catch (const NumericAbort& e) {
        err << "numeric abort: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ArgumentError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DatasetError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const MissingArtifact& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace kdg

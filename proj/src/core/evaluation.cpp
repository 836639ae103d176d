#include "kdg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace kdg {

double psnr(const Image& pred, const Image& gt) {
    require_same_shape(pred, gt, "psnr");
    double se = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - gt.data()[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(pred.size());
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

std::string ModelTag::name() const {
    return std::string(sampling_name(sampling)) + (trajectory_learning ? "_tl_" : "_fixed_") +
           std::string(noise_kind_name(noise));
}

std::vector<EvalRecord> evaluate_model(const TrainedModel& model, std::span<const Sample> dataset,
                                       const EvalOptions& opts) {
    if (dataset.empty()) throw ArgumentError("evaluate_model: dataset is empty");
    const SamplingPattern& pattern = opts.pattern_override ? *opts.pattern_override : model.pattern;
    const std::string name = model.name.empty() ? model.tag.name() : model.name;
    std::vector<EvalRecord> out;
    out.reserve(dataset.size());
    for (const auto& s : dataset) {
        const Acquired a = acquire(s.gt, pattern);
        const Image recon = opts.bypass_net ? a.net_input : forward(model.params, a.net_input);
        out.push_back({s.id, s.domain, name, psnr(recon, s.gt)});
    }
    return out;
}

MeanStd mean_std(std::span<const double> v) {
    if (v.empty()) return {};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size()))};
}

PairedEvalReport paired_diff(std::span<const EvalRecord> a, std::span<const EvalRecord> b) {
    std::map<std::uint32_t, double> pb;
    for (const auto& r : b) pb[r.sample_id] = r.psnr;
    std::map<std::uint32_t, double> pa;
    for (const auto& r : a) pa[r.sample_id] = r.psnr;

    PairedEvalReport rep;
    if (!a.empty()) {
        rep.model_a = a.front().model;
        rep.domain = a.front().domain;
    }
    if (!b.empty()) rep.model_b = b.front().model;
    for (const auto& [id, va] : pa) {
        const auto it = pb.find(id);
        if (it == pb.end()) continue;
        rep.ids.push_back(id);
        rep.diffs.push_back(va - it->second);
    }
    if (rep.ids.empty()) throw ArgumentError("paired_diff: no common sample ids");
    const MeanStd ms = mean_std(rep.diffs);
    rep.mean_diff = ms.mean;
    rep.std_diff = ms.std;
    rep.n = rep.ids.size();
    return rep;
}

CrossDomainReport cross_domain_matrix(std::span<const TrainedModel> models, std::span<const DomainSet> datasets) {
    if (models.empty()) throw ArgumentError("cross_domain_matrix: no models");
    if (datasets.empty()) throw ArgumentError("cross_domain_matrix: no datasets");
    CrossDomainReport rep;
    // records[model][domain set]
    std::vector<std::vector<std::vector<EvalRecord>>> recs(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
        for (const auto& ds : datasets) {
            auto r = evaluate_model(models[m], ds.samples);
            for (auto& e : r) e.domain = ds.domain;
            std::vector<double> v;
            for (const auto& e : r) v.push_back(e.psnr);
            const MeanStd ms = mean_std(v);
            rep.cells.push_back({r.front().model, ds.domain, ms.mean, ms.std, v.size()});
            rep.records.insert(rep.records.end(), r.begin(), r.end());
            recs[m].push_back(std::move(r));
        }
    }

    auto find = [&](const ModelTag& t) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < models.size(); ++i)
            if (models[i].tag == t) return i;
        return std::nullopt;
    };
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (std::size_t m = 0; m < models.size(); ++m) {
            const ModelTag& t = models[m].tag;
            if (t.trajectory_learning) continue;
            ModelTag tl = t;
            tl.trajectory_learning = true;
            if (auto j = find(tl)) rep.tl_pairs.push_back(paired_diff(recs[m][d], recs[*j][d]));
            if (t.noise != NoiseKind::None) {
                ModelTag clean = t;
                clean.noise = NoiseKind::None;
                if (auto j = find(clean)) rep.noise_pairs.push_back(paired_diff(recs[m][d], recs[*j][d]));
            }
        }
    }
    return rep;
}

namespace {
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

std::string matrix_csv(std::span<const MatrixCell> cells) {
    std::string s = "model,domain,mean_psnr,std_psnr\n";
    for (const auto& c : cells)
        s += c.model + "," + std::string(domain_name(c.domain)) + "," + num(c.mean_psnr) + "," + num(c.std_psnr) + "\n";
    return s;
}

std::string paired_csv(std::span<const PairedEvalReport> pairs) {
    std::string s = "model_a,model_b,mean_diff,std_diff,n\n";
    for (const auto& p : pairs)
        s += p.model_a + "," + p.model_b + "," + num(p.mean_diff) + "," + num(p.std_diff) + "," + std::to_string(p.n) +
             "\n";
    return s;
}

std::string records_csv(std::span<const EvalRecord> records) {
    std::string s = "model,domain,sample_id,psnr\n";
    for (const auto& r : records)
        s += r.model + "," + std::string(domain_name(r.domain)) + "," + std::to_string(r.sample_id) + "," +
             num(r.psnr) + "\n";
    return s;
}

}  // namespace kdg

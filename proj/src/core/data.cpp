#include "kdg/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "kdg/binary_io.hpp"

namespace kdg {

std::string_view domain_name(Domain d) { return d == Domain::Source ? "source" : "target"; }

Domain parse_domain(std::string_view s) {
    if (s == "source") return Domain::Source;
    if (s == "target") return Domain::Target;
    throw ArgumentError("unknown domain '" + std::string(s) + "'");
}

int PhantomSpec::native_size() const {
    if (domain == Domain::Source) return size;
    return std::max(2, static_cast<int>(std::lround(native_fraction * size)));
}

void PhantomSpec::validate() const {
    if (size < 16) throw ArgumentError("data.size must be >= 16");
    if (min_ellipses < 0 || max_ellipses < min_ellipses) throw ArgumentError("data ellipse count range is invalid");
    if (texture_noise_floor < 0) throw ArgumentError("data.texture_noise_floor must be >= 0");
    if (!(native_fraction > 0.0 && native_fraction <= 1.0)) throw ArgumentError("data.native_fraction must be in (0,1]");
}

namespace {

struct Ellipse {
    double cx, cy, a, b, angle, value;
};

// Adds `e` with an anti-aliased edge roughly one pixel wide. Returns the
// coverage weight per pixel when `coverage` is non-null.
void draw(Image& img, const Ellipse& e, std::vector<double>* coverage = nullptr) {
    const int n = img.height();
    const double c = std::cos(e.angle), s = std::sin(e.angle);
    const double px = 2.0 / n;  // pixel pitch in normalized units
    if (coverage) coverage->assign(img.size(), 0.0);
    for (int r = 0; r < n; ++r) {
        const double y = (2.0 * r + 1.0) / n - 1.0;
        for (int col = 0; col < n; ++col) {
            const double x = (2.0 * col + 1.0) / n - 1.0;
            const double u = ((x - e.cx) * c + (y - e.cy) * s) / e.a;
            const double v = (-(x - e.cx) * s + (y - e.cy) * c) / e.b;
            const double rho = std::sqrt(u * u + v * v);
            const double dist = (1.0 - rho) * std::min(e.a, e.b) / px;
            const double w = std::clamp(dist + 0.5, 0.0, 1.0);
            img(r, col) += w * e.value;
            if (coverage) (*coverage)[static_cast<std::size_t>(r) * n + col] = w;
        }
    }
}

}  // namespace

Sample generate_phantom(const PhantomSpec& spec, std::uint64_t seed, std::uint32_t id) {
    spec.validate();
    const bool target = spec.domain == Domain::Target;
    const int n = spec.native_size();
    std::mt19937_64 rng(seed);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    Image img(n, n);
    const double head_scale = target ? 0.82 : 1.0;
    const Ellipse head{uni(-0.05, 0.05), uni(-0.05, 0.05), head_scale * uni(0.72, 0.88), head_scale * uni(0.8, 0.94),
                       uni(-0.2, 0.2), uni(0.55, 0.75)};
    std::vector<double> head_cover;
    draw(img, head, &head_cover);

    if (target) {
        // bright rim (fat/skull analog) that sets the intensity ceiling
        Ellipse rim = head;
        rim.value = uni(0.9, 1.1);
        draw(img, rim);
        rim.a *= 0.9;
        rim.b *= 0.9;
        rim.value = -rim.value;
        draw(img, rim);
    }

    const int count = std::uniform_int_distribution<int>(spec.min_ellipses, spec.max_ellipses)(rng);
    for (int k = 0; k < count; ++k) {
        const double rad = uni(0.0, 0.6), phi = uni(0.0, 2.0 * std::numbers::pi);
        Ellipse e{head.cx + rad * head.a * std::cos(phi), head.cy + rad * head.b * std::sin(phi), uni(0.06, 0.3),
                  uni(0.06, 0.3), uni(0.0, std::numbers::pi), 0.0};
        e.a = std::min(e.a, head.a * (1.0 - rad * 0.9));
        e.b = std::min(e.b, head.b * (1.0 - rad * 0.9));
        if (target) {
            const double mag = uni(0.05, 0.15);
            e.value = uni(0.0, 1.0) < 0.75 ? -mag : mag;
        } else {
            const double mag = uni(0.2, 0.45);
            e.value = uni(0.0, 1.0) < 0.6 ? mag : -mag;
        }
        draw(img, e);
    }

    if (target && spec.texture_noise_floor > 0.0) {
        std::normal_distribution<double> normal(0.0, spec.texture_noise_floor);
        for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] += head_cover[i] * normal(rng);
    }
    for (auto& v : img.data()) v = std::max(v, 0.0);
    if (n != spec.size) img = resize_bilinear(img, spec.size, spec.size);

    Sample s;
    s.gt = normalize01(img).image;
    s.id = id;
    s.domain = spec.domain;
    return s;
}

std::vector<Sample> generate_dataset(const PhantomSpec& spec, int count, std::uint64_t seed, std::uint32_t first_id) {
    if (count < 0) throw ArgumentError("dataset count must be >= 0");
    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(spec.domain), static_cast<std::uint32_t>(i)};
        std::mt19937_64 mix(seq);
        out.push_back(generate_phantom(spec, mix(), first_id + static_cast<std::uint32_t>(i)));
    }
    return out;
}

Image rss_combine(std::span<const ComplexImage> coils) {
    if (coils.empty()) throw ArgumentError("rss_combine needs at least one coil");
    Image out(coils[0].height(), coils[0].width());
    for (const auto& c : coils) {
        require_same_shape(coils[0], c, "rss_combine");
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += std::norm(c.data()[i]);
    }
    for (auto& v : out.data()) v = std::sqrt(v);
    return out;
}

Image resize_bilinear(const Image& img, int new_height, int new_width) {
    if (img.height() < 2 || img.width() < 2 || new_height < 2 || new_width < 2)
        throw ArgumentError("resize_bilinear needs dimensions >= 2");
    Image out(new_height, new_width);
    const double sy = static_cast<double>(img.height() - 1) / (new_height - 1);
    const double sx = static_cast<double>(img.width() - 1) / (new_width - 1);
    for (int r = 0; r < new_height; ++r) {
        const double fy = r * sy;
        const int y0 = std::min(static_cast<int>(fy), img.height() - 2);
        const double ty = fy - y0;
        for (int c = 0; c < new_width; ++c) {
            const double fx = c * sx;
            const int x0 = std::min(static_cast<int>(fx), img.width() - 2);
            const double tx = fx - x0;
            const double top = (1.0 - tx) * img(y0, x0) + tx * img(y0, x0 + 1);
            const double bot = (1.0 - tx) * img(y0 + 1, x0) + tx * img(y0 + 1, x0 + 1);
            out(r, c) = (1.0 - ty) * top + ty * bot;
        }
    }
    return out;
}

Normalized normalize01(const Image& img) {
    const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
    const double mn = *lo, mx = *hi;
    if (!(mx > mn)) return {Image(img.height(), img.width()), true};
    Normalized r{img, false};
    // divide rather than scale by the reciprocal so the maximum maps to exactly 1
    const double range = mx - mn;
    for (auto& v : r.image.data()) v = (v - mn) / range;
    return r;
}

// ---- dataset file -----------------------------------------------------------

std::vector<std::uint8_t> encode_dataset(std::span<const Sample> samples) {
    std::vector<std::uint8_t> buf;
    bin::put_magic(buf, "KDGD");
    bin::put<std::uint32_t>(buf, kDatasetVersion);
    bin::put<std::uint32_t>(buf, static_cast<std::uint32_t>(samples.size()));
    for (const auto& s : samples) {
        if (s.gt.height() > 65535 || s.gt.width() > 65535) throw ArgumentError("sample too large for dataset format");
        bin::put<std::uint32_t>(buf, s.id);
        bin::put<std::uint8_t>(buf, static_cast<std::uint8_t>(s.domain));
        bin::put<std::uint16_t>(buf, static_cast<std::uint16_t>(s.gt.height()));
        bin::put<std::uint16_t>(buf, static_cast<std::uint16_t>(s.gt.width()));
        for (double v : s.gt.data()) bin::put<double>(buf, v);
    }
    return buf;
}

std::vector<Sample> decode_dataset(const std::vector<std::uint8_t>& bytes) {
    using K = DatasetError::Kind;
    bin::Reader r(bytes);
    if (!r.magic_is("KDGD")) throw DatasetError(K::BadMagic, "dataset: bad magic (expected KDGD)");
    std::uint32_t version = 0, count = 0;
    if (!r.get(version)) throw DatasetError(K::Truncated, "dataset: truncated header", 12, bytes.size());
    if (version != kDatasetVersion)
        throw DatasetError(K::VersionMismatch, "dataset: version " + std::to_string(version) + " != " +
                                                   std::to_string(kDatasetVersion));
    if (!r.get(count)) throw DatasetError(K::Truncated, "dataset: truncated header", 12, bytes.size());

    std::vector<Sample> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t id = 0;
        std::uint8_t dom = 0;
        std::uint16_t h = 0, w = 0;
        const std::size_t head_at = r.position();
        if (!r.get(id) || !r.get(dom) || !r.get(h) || !r.get(w))
            throw DatasetError(K::Truncated, "dataset: truncated sample header", head_at + 9, bytes.size());
        if (dom > 1) throw DatasetError(K::Malformed, "dataset: unknown domain tag " + std::to_string(dom));
        if (h == 0 || w == 0) throw DatasetError(K::Malformed, "dataset: zero-sized sample");
        const std::size_t need = static_cast<std::size_t>(h) * w * sizeof(double);
        if (r.remaining() < need)
            throw DatasetError(K::Truncated,
                               "dataset: truncated payload (expected " + std::to_string(r.position() + need) +
                                   " bytes, have " + std::to_string(bytes.size()) + ")",
                               r.position() + need, bytes.size());
        std::vector<double> px(static_cast<std::size_t>(h) * w);
        for (auto& v : px) r.get(v);
        out.push_back({Image(h, w, std::move(px)), id, static_cast<Domain>(dom)});
    }
    if (r.remaining() != 0) throw DatasetError(K::Malformed, "dataset: trailing bytes after last sample");
    return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples) {
    bin::write_file(path.string(), encode_dataset(samples));
}

std::vector<Sample> read_dataset(const std::filesystem::path& path) {
    return decode_dataset(bin::read_file(path.string()));
}

void write_pgm16(const std::filesystem::path& path, const Image& img) {
    std::vector<std::uint8_t> buf;
    const std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n65535\n";
    buf.insert(buf.end(), header.begin(), header.end());
    for (double v : img.data()) {
        const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
        buf.push_back(static_cast<std::uint8_t>(q >> 8));  // PGM samples are big-endian
        buf.push_back(static_cast<std::uint8_t>(q & 0xFF));
    }
    bin::write_file(path.string(), buf);
}

}  // namespace kdg

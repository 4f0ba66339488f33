#include "scesame/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>

#include "scesame/error.hpp"

namespace scesame {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    return out;
}

// Next whitespace-separated header token, skipping '#' comments.
std::string header_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) throw Error(ErrorKind::MalformedInput, "truncated image header");
    return tok;
}

int header_int(std::istream& in) {
    const auto tok = header_token(in);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw Error(ErrorKind::MalformedInput, "bad image header field '" + tok + "'");
    }
}

BinaryMask read_pgm_mask(const fs::path& path) {
    auto in = open_in(path);
    const auto magic = header_token(in);
    if (magic != "P5" && magic != "P2") throw Error(ErrorKind::MalformedInput, path.string() + " is not a PGM file");
    const int w = header_int(in);
    const int h = header_int(in);
    const int maxval = header_int(in);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
        throw Error(ErrorKind::MalformedInput, "bad PGM header in " + path.string());
    }
    BinaryMask m(h, w, 0);
    if (magic == "P2") {
        for (auto& v : m.data) {
            int x;
            if (!(in >> x)) throw Error(ErrorKind::MalformedInput, "truncated PGM " + path.string());
            v = x != 0 ? 1 : 0;
        }
        return m;
    }
    const std::size_t bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(m.size() * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
        throw Error(ErrorKind::MalformedInput, "truncated PGM " + path.string());
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        const bool on = bytes == 1 ? raw[i] != 0 : (raw[2 * i] | raw[2 * i + 1]) != 0;
        m.data[i] = on ? 1 : 0;
    }
    return m;
}

BinaryMask read_png_mask(const fs::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw Error(ErrorKind::MalformedInput, "cannot read PNG " + path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw Error(ErrorKind::MalformedInput, "cannot decode PNG " + path.string() + ": " + image.message);
    }
    BinaryMask m(static_cast<int>(image.height), static_cast<int>(image.width), 0);
    for (std::size_t i = 0; i < m.size(); ++i) m.data[i] = buf[i] != 0 ? 1 : 0;
    return m;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

LoadedMasks parse_mask_json(const nlohmann::json& doc, const fs::path& base_dir) {
    LoadedMasks res;
    try {
        const auto& image = doc.at("image");
        res.masks.image_height = image.at("height").get<int>();
        res.masks.image_width = image.at("width").get<int>();
        if (image.contains("file_name") && image.at("file_name").is_string()) {
            res.masks.file_name = image.at("file_name").get<std::string>();
        }
        if (res.masks.image_height <= 0 || res.masks.image_width <= 0) {
            throw Error(ErrorKind::MalformedInput, "image dimensions must be positive");
        }
        for (const auto& jm : doc.at("masks")) {
            MaskRecord rec;
            rec.id = jm.at("id").get<int>();
            const auto& rle = jm.at("rle");
            const auto size = rle.at("size").get<std::vector<int>>();
            if (size.size() != 2) throw Error(ErrorKind::MalformedInput, "rle.size must be [H, W]");
            if (!rle.at("counts").is_array()) {
                throw Error(ErrorKind::MalformedInput, "mask " + std::to_string(rec.id) +
                                                           ": only integer-array RLE counts are supported");
            }
            rec.segmentation.height = size[0];
            rec.segmentation.width = size[1];
            for (const auto& c : rle.at("counts")) {
                if (!c.is_number_integer() || c.get<long long>() < 0) {
                    throw Error(ErrorKind::MalformedInput, "RLE counts must be nonnegative integers");
                }
                rec.segmentation.counts.push_back(c.get<std::uint32_t>());
            }
            if (jm.contains("score") && !jm.at("score").is_null()) rec.score = jm.at("score").get<double>();
            if (jm.contains("logits_file") && !jm.at("logits_file").is_null()) {
                rec.logits = read_logits(base_dir / jm.at("logits_file").get<std::string>(), res.masks.image_height,
                                         res.masks.image_width);
            }
            res.masks.masks.push_back(std::move(rec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedInput, std::string("mask JSON: ") + e.what());
    }
    res.warnings = validate_mask_set(res.masks);
    return res;
}

LoadedMasks load_mask_json(const fs::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedInput, path.string() + ": " + e.what());
    }
    auto res = parse_mask_json(doc, path.parent_path());
    if (res.masks.file_name.empty()) res.masks.file_name = path.stem().string();
    return res;
}

nlohmann::json mask_set_to_json(const MaskSet& masks, const std::vector<std::vector<int>>* members) {
    nlohmann::json doc;
    doc["image"] = {{"height", masks.image_height}, {"width", masks.image_width}, {"file_name", masks.file_name}};
    doc["masks"] = nlohmann::json::array();
    for (std::size_t i = 0; i < masks.masks.size(); ++i) {
        const auto& m = masks.masks[i];
        nlohmann::json jm;
        jm["id"] = m.id;
        jm["rle"] = {{"size", {m.segmentation.height, m.segmentation.width}}, {"counts", m.segmentation.counts}};
        jm["score"] = m.score ? nlohmann::json(*m.score) : nlohmann::json(nullptr);
        jm["logits_file"] = nullptr;
        if (members && i < members->size()) jm["members"] = (*members)[i];
        doc["masks"].push_back(std::move(jm));
    }
    return doc;
}

void write_mask_json(const fs::path& path, const MaskSet& masks, const std::vector<std::vector<int>>* members) {
    write_text_file(path, mask_set_to_json(masks, members).dump());
}

Grid<float> read_logits(const fs::path& path, int height, int width) {
    auto in = open_in(path);
    Grid<float> g(height, width, 0.0f);
    const auto bytes = static_cast<std::streamsize>(g.size() * sizeof(float));
    in.read(reinterpret_cast<char*>(g.data.data()), bytes);
    if (in.gcount() != bytes || in.peek() != EOF) {
        throw Error(ErrorKind::MalformedInput, path.string() + " does not hold exactly H*W float32 values");
    }
    return g;
}

void write_logits(const fs::path& path, const Grid<float>& logits) {
    auto out = open_out(path);
    out.write(reinterpret_cast<const char*>(logits.data.data()),
              static_cast<std::streamsize>(logits.size() * sizeof(float)));
}

void write_pfm(const fs::path& path, const EdgeMap& e) {
    auto out = open_out(path);
    out << "Pf\n" << e.width << ' ' << e.height << "\n-1.0\n";
    std::vector<float> row(static_cast<std::size_t>(e.width));
    for (int r = e.height - 1; r >= 0; --r) {
        for (int c = 0; c < e.width; ++c) row[static_cast<std::size_t>(c)] = static_cast<float>(e.at(r, c));
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

EdgeMap read_pfm(const fs::path& path) {
    auto in = open_in(path);
    const auto magic = header_token(in);
    if (magic != "Pf") throw Error(ErrorKind::MalformedInput, path.string() + " is not a grayscale PFM");
    const int w = header_int(in);
    const int h = header_int(in);
    const double scale = std::stod(header_token(in));
    if (w <= 0 || h <= 0) throw Error(ErrorKind::MalformedInput, "bad PFM size in " + path.string());
    const bool little = scale < 0.0;
    EdgeMap e(h, w, 0.0);
    std::vector<std::uint32_t> row(static_cast<std::size_t>(w));
    for (int r = h - 1; r >= 0; --r) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
        if (in.gcount() != static_cast<std::streamsize>(row.size() * 4)) {
            throw Error(ErrorKind::MalformedInput, "truncated PFM " + path.string());
        }
        for (int c = 0; c < w; ++c) {
            std::uint32_t bits = row[static_cast<std::size_t>(c)];
            if (!little) bits = __builtin_bswap32(bits);
            e.at(r, c) = std::bit_cast<float>(bits);
        }
    }
    return e;
}

void write_pgm(const fs::path& path, const EdgeMap& e) {
    auto out = open_out(path);
    out << "P5\n" << e.width << ' ' << e.height << "\n255\n";
    std::vector<unsigned char> px(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        px[i] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(e.data[i], 0.0, 1.0)));
    }
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

void write_binary_pgm(const fs::path& path, const BinaryMask& m) {
    auto out = open_out(path);
    out << "P5\n" << m.width << ' ' << m.height << "\n255\n";
    std::vector<unsigned char> px(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) px[i] = m.data[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

BinaryMask read_binary_image(const fs::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") return read_png_mask(path);
    return read_pgm_mask(path);
}

GroundTruth load_ground_truth_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (entry.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::MalformedInput, "no annotations in " + dir.string());
    GroundTruth gt;
    for (const auto& f : files) {
        gt.annotations.push_back(read_binary_image(f));
        if (!gt.annotations.back().same_shape(gt.annotations.front())) {
            throw Error(ErrorKind::Shape, "annotations in " + dir.string() + " differ in size");
        }
    }
    return gt;
}

namespace {

nlohmann::json point_to_json(const PrPoint& p) {
    return {{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1},
            {"matched_pred", p.matched_pred}, {"predicted", p.predicted}, {"matched_gt", p.matched_gt},
            {"gt_total", p.gt_total}};
}

}  // namespace

nlohmann::json metrics_to_json(const MetricsReport& report, const std::vector<std::string>& image_names) {
    nlohmann::json doc;
    doc["ods"] = report.ods;
    doc["ods_threshold"] = report.ods_threshold;
    doc["ois"] = report.ois;
    doc["ap"] = report.ap;
    doc["per_threshold"] = nlohmann::json::array();
    for (const auto& p : report.per_threshold) doc["per_threshold"].push_back(point_to_json(p));
    doc["per_image_best"] = nlohmann::json::array();
    for (std::size_t i = 0; i < report.per_image_best.size(); ++i) {
        auto row = point_to_json(report.per_image_best[i].point);
        if (i < image_names.size()) row["image"] = image_names[i];
        doc["per_image_best"].push_back(std::move(row));
    }
    return doc;
}

std::string pr_curve_csv(const std::vector<PrPoint>& curve) {
    std::string out = "threshold,precision,recall,f1\n";
    char line[128];
    for (const auto& p : curve) {
        std::snprintf(line, sizeof line, "%.2f,%.17g,%.17g,%.17g\n", p.threshold, p.precision, p.recall, p.f1);
        out += line;
    }
    return out;
}

std::vector<PrPoint> pr_curve_from_json(const nlohmann::json& report) {
    std::vector<PrPoint> curve;
    try {
        for (const auto& j : report.at("per_threshold")) {
            PrPoint p;
            p.threshold = j.at("threshold").get<double>();
            p.matched_pred = j.at("matched_pred").get<std::int64_t>();
            p.predicted = j.at("predicted").get<std::int64_t>();
            p.matched_gt = j.at("matched_gt").get<std::int64_t>();
            p.gt_total = j.at("gt_total").get<std::int64_t>();
            finalize_counts(p);
            curve.push_back(p);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedInput, std::string("report JSON: ") + e.what());
    }
    return curve;
}

}  // namespace scesame

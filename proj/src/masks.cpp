#include "snowsight/masks.hpp"

#include "snowsight/errors.hpp"

#include <bit>
#include <fstream>
#include <string>

namespace snowsight {

LabelRaster::LabelRaster(int width, int height, std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
    if (width_ <= 0 || height_ <= 0)
        throw DimensionMismatchError("raster dimensions must be positive");
    if (labels_.size() != std::size_t(width_) * height_)
        throw DimensionMismatchError("label count does not match raster dimensions");
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] > kMaxLabel) throw IllegalLabelValueError(labels_[i], i);
}

LabelRaster LabelRaster::filled(int width, int height, std::uint8_t value) {
    return LabelRaster(width, height,
                       std::vector<std::uint8_t>(std::size_t(width) * height, value));
}

void LabelRaster::set(int x, int y, std::uint8_t value) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_)
        throw DimensionMismatchError("pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                                     ") outside " + std::to_string(width_) + "x" +
                                     std::to_string(height_) + " raster");
    if (value > kMaxLabel) throw IllegalLabelValueError(value, std::size_t(y) * width_ + x);
    labels_[std::size_t(y) * width_ + x] = value;
}

std::size_t LabelRaster::count(Category c) const {
    std::size_t n = 0;
    for (std::uint8_t v : labels_)
        if (v == static_cast<std::uint8_t>(c)) ++n;
    return n;
}

PixelSet::PixelSet(int width, int height)
    : width_(width), height_(height), words_((std::size_t(width) * height + 63) / 64, 0) {
    if (width <= 0 || height <= 0)
        throw DimensionMismatchError("pixel set dimensions must be positive");
}

void PixelSet::insert(int x, int y) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_)
        throw DimensionMismatchError("pixel out of range");
    const std::size_t bit = std::size_t(y) * width_ + x;
    words_[bit >> 6] |= std::uint64_t(1) << (bit & 63);
}

std::size_t PixelSet::size() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
}

std::size_t PixelSet::intersection_size(const PixelSet& other) const {
    if (width_ != other.width_ || height_ != other.height_)
        throw DimensionMismatchError("pixel set dimensions differ");
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
        n += std::popcount(words_[i] & other.words_[i]);
    return n;
}

namespace {

struct PgmReader {
    std::string data;
    std::size_t pos = 0;

    bool eof() const { return pos >= data.size(); }

    // Skips whitespace and '#' comments (which run to end of line).
    void skip_space() {
        while (!eof()) {
            const char c = data[pos];
            if (c == '#') {
                while (!eof() && data[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    }

    int number() {
        skip_space();
        if (eof() || data[pos] < '0' || data[pos] > '9')
            throw MalformedPgmError("expected number in PGM header");
        long v = 0;
        while (!eof() && data[pos] >= '0' && data[pos] <= '9') {
            v = v * 10 + (data[pos] - '0');
            if (v > 1 << 30) throw MalformedPgmError("PGM header number out of range");
            ++pos;
        }
        return static_cast<int>(v);
    }
};

}  // namespace

LabelRaster load_label_raster(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError(path.string());
    PgmReader r;
    r.data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());

    if (r.data.size() < 2 || r.data[0] != 'P' || r.data[1] != '5')
        throw MalformedPgmError(path.string() + ": not a binary PGM (P5)");
    r.pos = 2;
    const int width = r.number();
    const int height = r.number();
    const int maxval = r.number();
    if (width <= 0 || height <= 0) throw MalformedPgmError(path.string() + ": bad dimensions");
    if (maxval != 255) throw MalformedPgmError(path.string() + ": maxval must be 255");
    if (r.eof()) throw MalformedPgmError(path.string() + ": truncated header");
    const char sep = r.data[r.pos++];
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
        throw MalformedPgmError(path.string() + ": missing separator after maxval");

    const std::size_t expected = std::size_t(width) * height;
    if (r.data.size() - r.pos != expected)
        throw MalformedPgmError(path.string() + ": pixel payload has wrong size");
    std::vector<std::uint8_t> labels(r.data.begin() + r.pos, r.data.end());
    return LabelRaster(width, height, std::move(labels));
}

void save_label_raster(const LabelRaster& raster, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << raster.width() << ' ' << raster.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(raster.labels().data()),
              static_cast<std::streamsize>(raster.labels().size()));
    if (!out) throw IoError("write failed: " + path.string());
}

PixelSet category_pixels(const LabelRaster& raster, Category category) {
    PixelSet set(raster.width(), raster.height());
    for (int y = 0; y < raster.height(); ++y)
        for (int x = 0; x < raster.width(); ++x)
            if (raster.at(x, y) == static_cast<std::uint8_t>(category)) set.insert(x, y);
    return set;
}

PixelSet right_side_filter(const PixelSet& pixels, KeepSide side) {
    const int mid_x = pixels.width() / 2;
    const int mid_y = pixels.height() / 2;
    PixelSet out(pixels.width(), pixels.height());
    pixels.for_each([&](int x, int y) {
        if (y < mid_y) return;
        if (side == KeepSide::Right ? x >= mid_x : x <= mid_x) out.insert(x, y);
    });
    return out;
}

double overlap_ratio(const PixelSet& subject, const PixelSet& cover) {
    const std::size_t total = subject.size();
    if (subject.width() != cover.width() || subject.height() != cover.height())
        throw DimensionMismatchError("subject and cover dimensions differ");
    if (total == 0) throw EmptySubjectError("overlap subject is empty");
    return static_cast<double>(subject.intersection_size(cover)) / static_cast<double>(total);
}

}  // namespace snowsight

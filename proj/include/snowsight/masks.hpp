#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace snowsight {

// Label codes used by every raster in the pipeline.
enum class Category : std::uint8_t { Void = 0, Road = 1, Sidewalk = 2, Snow = 3 };

constexpr std::uint8_t kMaxLabel = 3;

// Dense byte raster, row-major, values restricted to 0..3.
class LabelRaster {
public:
    LabelRaster(int width, int height, std::vector<std::uint8_t> labels);
    static LabelRaster filled(int width, int height, std::uint8_t value);

    int width() const { return width_; }
    int height() const { return height_; }
    std::uint8_t at(int x, int y) const { return labels_[std::size_t(y) * width_ + x]; }
    void set(int x, int y, std::uint8_t value);
    const std::vector<std::uint8_t>& labels() const { return labels_; }
    std::size_t count(Category c) const;

    bool operator==(const LabelRaster&) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> labels_;
};

// Bitset over a raster grid.
class PixelSet {
public:
    PixelSet(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    bool contains(int x, int y) const {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
        const std::size_t bit = std::size_t(y) * width_ + x;
        return (words_[bit >> 6] >> (bit & 63)) & 1u;
    }
    void insert(int x, int y);
    std::size_t size() const;
    std::size_t intersection_size(const PixelSet& other) const;

    template <typename Fn>
    void for_each(Fn&& fn) const {  // ascending y, then x
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x)
                if (contains(x, y)) fn(x, y);
    }

    bool operator==(const PixelSet&) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint64_t> words_;
};

// Binary PGM (P5, maxval 255) with the label codes as pixel bytes.
LabelRaster load_label_raster(const std::filesystem::path& path);
void save_label_raster(const LabelRaster& raster, const std::filesystem::path& path);

PixelSet category_pixels(const LabelRaster& raster, Category category);

enum class KeepSide { Right, Left };

// Keeps the lower right (or lower left) image quadrant: pixels with
// y >= floor(h / 2) and x >= floor(w / 2) for Right, x <= floor(w / 2) for
// Left; boundary pixels are retained. With a forward-facing vehicle camera
// that quadrant holds the sidewalk adjacent to the lane being driven, so
// Left suits regions that drive on the left.
PixelSet right_side_filter(const PixelSet& pixels, KeepSide side);

// |subject intersect cover| / |subject|. The subject must be non-empty.
double overlap_ratio(const PixelSet& subject, const PixelSet& cover);

}  // namespace snowsight

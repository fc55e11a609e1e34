#include "eis/rle.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace eis {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32(const std::uint8_t* data, std::size_t size, std::size_t& offset) {
    if (offset + 4 > size) throw Error("RLE: truncated data");
    std::uint32_t v = static_cast<std::uint32_t>(data[offset]) |
                      static_cast<std::uint32_t>(data[offset + 1]) << 8 |
                      static_cast<std::uint32_t>(data[offset + 2]) << 16 |
                      static_cast<std::uint32_t>(data[offset + 3]) << 24;
    offset += 4;
    return v;
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

}  // namespace

void RegionMask::finalize() {
    const std::uint64_t total = static_cast<std::uint64_t>(width) * height;
    std::uint64_t sum = 0;
    area = 0;
    x_min = width;
    y_min = height;
    x_max = -1;
    y_max = -1;
    std::uint64_t pos = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if ((i & 1) == 1 && runs[i] > 0) {
            area += runs[i];
            const std::uint64_t start = pos;
            const std::uint64_t end = pos + runs[i] - 1;  // inclusive
            const int ys = static_cast<int>(start / width);
            const int ye = static_cast<int>(end / width);
            y_min = std::min(y_min, ys);
            y_max = std::max(y_max, ye);
            if (ys == ye) {
                x_min = std::min(x_min, static_cast<int>(start % width));
                x_max = std::max(x_max, static_cast<int>(end % width));
            } else {
                // run spans full rows in between
                x_min = 0;
                x_max = width - 1;
            }
        }
        pos += runs[i];
        sum += runs[i];
    }
    if (sum != total) throw Error("RLE: run lengths sum to " + std::to_string(sum) +
                                  ", expected " + std::to_string(total));
}

BinaryMask RegionMask::to_mask() const {
    Gray8Image grid(width, height, 0);
    for_each_one_run([&](std::uint64_t start, std::uint32_t len) {
        std::fill(grid.data.begin() + start, grid.data.begin() + start + len,
                  static_cast<std::uint8_t>(1));
    });
    return BinaryMask(std::move(grid));
}

RegionMask RegionMask::from_mask(const BinaryMask& mask) {
    RegionMask out;
    out.width = mask.width();
    out.height = mask.height();
    const auto& d = mask.grid.data;
    std::uint8_t cur = 0;
    std::uint32_t len = 0;
    for (std::uint8_t v : d) {
        if (v > 1) throw Error("RLE: mask value outside {0,1}");
        if (v == cur) {
            ++len;
        } else {
            out.runs.push_back(len);
            cur = v;
            len = 1;
        }
    }
    out.runs.push_back(len);
    out.finalize();
    return out;
}

RegionMask RegionMask::from_labels(const std::vector<std::int32_t>& labels, int width, int height,
                                   const std::function<bool(std::int32_t)>& member) {
    RegionMask out;
    out.width = width;
    out.height = height;
    std::uint8_t cur = 0;
    std::uint32_t len = 0;
    for (std::int32_t l : labels) {
        const std::uint8_t v = member(l) ? 1 : 0;
        if (v == cur) {
            ++len;
        } else {
            out.runs.push_back(len);
            cur = v;
            len = 1;
        }
    }
    out.runs.push_back(len);
    out.finalize();
    return out;
}

std::uint64_t RegionMask::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (i * 8)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(width));
    mix(static_cast<std::uint64_t>(height));
    for (std::uint32_t r : runs) mix(r);
    return h;
}

std::uint64_t intersection_area(const RegionMask& a, const RegionMask& b) {
    if (a.width != b.width || a.height != b.height) throw Error("RLE: dimension mismatch");
    std::uint64_t inter = 0;
    std::size_t ia = 0, ib = 0;
    std::uint64_t pa = 0, pb = 0;  // start offsets of current runs
    while (ia < a.runs.size() && ib < b.runs.size()) {
        const std::uint64_t ea = pa + a.runs[ia];
        const std::uint64_t eb = pb + b.runs[ib];
        if ((ia & 1) && (ib & 1)) {
            const std::uint64_t lo = std::max(pa, pb);
            const std::uint64_t hi = std::min(ea, eb);
            if (hi > lo) inter += hi - lo;
        }
        if (ea <= eb) {
            pa = ea;
            ++ia;
        }
        if (eb <= ea) {
            pb = eb;
            ++ib;
        }
    }
    return inter;
}

double iou(const RegionMask& a, const RegionMask& b) {
    const std::uint64_t inter = intersection_area(a, b);
    const std::uint64_t uni = a.area + b.area - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::uint64_t intersection_area(const RegionMask& a, const BoundingBox& box) {
    std::uint64_t inter = 0;
    a.for_each_one_run([&](std::uint64_t start, std::uint32_t len) {
        std::uint64_t pos = start;
        std::uint64_t left = len;
        while (left > 0) {
            const int y = static_cast<int>(pos / a.width);
            const int x = static_cast<int>(pos % a.width);
            const std::uint32_t row_len = std::min<std::uint64_t>(left, a.width - x);
            if (y >= box.y_min && y <= box.y_max) {
                const int lo = std::max(x, box.x_min);
                const int hi = std::min(static_cast<int>(x + row_len - 1), box.x_max);
                if (hi >= lo) inter += static_cast<std::uint64_t>(hi - lo + 1);
            }
            pos += row_len;
            left -= row_len;
        }
    });
    return inter;
}

double iou(const RegionMask& a, const BoundingBox& box) {
    const std::uint64_t inter = intersection_area(a, box);
    const std::uint64_t uni = a.area + static_cast<std::uint64_t>(box.area()) - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

// per-row [start,end) intervals of ones
std::vector<std::vector<std::pair<int, int>>> row_intervals(const RegionMask& m) {
    std::vector<std::vector<std::pair<int, int>>> rows(m.height);
    m.for_each_one_run([&](std::uint64_t start, std::uint32_t len) {
        std::uint64_t pos = start;
        std::uint64_t left = len;
        while (left > 0) {
            const int y = static_cast<int>(pos / m.width);
            const int x = static_cast<int>(pos % m.width);
            const std::uint32_t row_len = std::min<std::uint64_t>(left, m.width - x);
            rows[y].emplace_back(x, static_cast<int>(x + row_len));
            pos += row_len;
            left -= row_len;
        }
    });
    return rows;
}

std::uint64_t interval_symdiff(const std::vector<std::pair<int, int>>& a,
                               const std::vector<std::pair<int, int>>& b) {
    std::uint64_t inter = 0, la = 0, lb = 0;
    for (auto [s, e] : a) la += e - s;
    for (auto [s, e] : b) lb += e - s;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        const int lo = std::max(a[ia].first, b[ib].first);
        const int hi = std::min(a[ia].second, b[ib].second);
        if (hi > lo) inter += hi - lo;
        if (a[ia].second <= b[ib].second)
            ++ia;
        else
            ++ib;
    }
    return la + lb - 2 * inter;
}

}  // namespace

std::uint64_t perimeter(const RegionMask& mask) {
    const auto rows = row_intervals(mask);
    std::uint64_t edges = 0;
    const std::vector<std::pair<int, int>> empty;
    for (int y = 0; y < mask.height; ++y) {
        edges += 2 * rows[y].size();  // left and right edge per interval
        const auto& above = y == 0 ? empty : rows[y - 1];
        edges += interval_symdiff(rows[y], above);
    }
    if (mask.height > 0) {
        std::uint64_t last = 0;
        for (auto [s, e] : rows[mask.height - 1]) last += e - s;
        edges += last;  // bottom exposure
    }
    return edges;
}

bool is_4_connected(const RegionMask& mask) {
    if (mask.area == 0) return false;
    BinaryMask m = mask.to_mask();
    const int w = mask.width, h = mask.height;
    std::vector<std::uint8_t> seen(m.grid.data.size(), 0);
    std::vector<std::int64_t> stack;
    std::int64_t start = -1;
    for (std::size_t i = 0; i < m.grid.data.size(); ++i) {
        if (m.grid.data[i]) {
            start = static_cast<std::int64_t>(i);
            break;
        }
    }
    stack.push_back(start);
    seen[start] = 1;
    std::uint64_t visited = 0;
    while (!stack.empty()) {
        const std::int64_t p = stack.back();
        stack.pop_back();
        ++visited;
        const int x = static_cast<int>(p % w);
        const int y = static_cast<int>(p / w);
        const int dx[4] = {1, -1, 0, 0};
        const int dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = x + dx[k], ny = y + dy[k];
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::int64_t q = static_cast<std::int64_t>(ny) * w + nx;
            if (m.grid.data[q] && !seen[q]) {
                seen[q] = 1;
                stack.push_back(q);
            }
        }
    }
    return visited == mask.area;
}

void append_rle(std::vector<std::uint8_t>& out, const RegionMask& mask) {
    put_u32(out, static_cast<std::uint32_t>(mask.width));
    put_u32(out, static_cast<std::uint32_t>(mask.height));
    for (std::uint32_t r : mask.runs) put_u32(out, r);
}

RegionMask parse_rle(const std::uint8_t* data, std::size_t size, std::size_t& offset) {
    RegionMask m;
    m.width = static_cast<int>(get_u32(data, size, offset));
    m.height = static_cast<int>(get_u32(data, size, offset));
    if (m.width <= 0 || m.height <= 0) throw Error("RLE: bad dimensions");
    const std::uint64_t total = static_cast<std::uint64_t>(m.width) * m.height;
    std::uint64_t sum = 0;
    while (sum < total) {
        const std::uint32_t r = get_u32(data, size, offset);
        m.runs.push_back(r);
        sum += r;
    }
    m.finalize();  // throws if sum overshoots
    return m;
}

void write_rle_file(const std::filesystem::path& path, const RegionMask& mask) {
    std::vector<std::uint8_t> buf;
    append_rle(buf, mask);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

RegionMask read_rle_file(const std::filesystem::path& path) {
    const auto buf = read_all(path);
    std::size_t offset = 0;
    RegionMask m = parse_rle(buf.data(), buf.size(), offset);
    if (offset != buf.size()) throw Error("RLE: trailing bytes in " + path.string());
    return m;
}

void write_rle_pack(const std::filesystem::path& path, const std::vector<RegionMask>& masks) {
    std::vector<std::uint8_t> buf;
    put_u32(buf, static_cast<std::uint32_t>(masks.size()));
    for (const auto& m : masks) append_rle(buf, m);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::vector<RegionMask> read_rle_pack(const std::filesystem::path& path) {
    const auto buf = read_all(path);
    std::size_t offset = 0;
    const std::uint32_t count = get_u32(buf.data(), buf.size(), offset);
    std::vector<RegionMask> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) out.push_back(parse_rle(buf.data(), buf.size(), offset));
    if (offset != buf.size()) throw Error("RLE pack: trailing bytes in " + path.string());
    return out;
}

}  // namespace eis

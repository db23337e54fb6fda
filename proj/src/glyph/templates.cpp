#include "glyphseg/glyph/templates.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <optional>
#include <thread>

#include "glyphseg/error.hpp"
#include "glyphseg/raster/image.hpp"
#include "glyphseg/raster/morphology.hpp"
#include "glyphseg/simd/kernels.hpp"

namespace glyphseg {

namespace {

struct Span {
    int pixel;
    double weight;
};

// Source pixels overlapped by each of `cells` equal slices of [0, length).
std::vector<std::vector<Span>> cell_spans(int length, int cells) {
    std::vector<std::vector<Span>> spans(cells);
    const double step = double(length) / cells;
    for (int c = 0; c < cells; ++c) {
        const double a = c * step;
        const double b = (c + 1) * step;
        for (int p = static_cast<int>(std::floor(a)); p < static_cast<int>(std::ceil(b)) && p < length; ++p) {
            const double overlap = std::min(b, p + 1.0) - std::max(a, double(p));
            if (overlap > 0.0) spans[c].push_back({p, overlap});
        }
    }
    return spans;
}

}  // namespace

BitMask normalize_to_grid(const BitMask& ink, int grid) {
    if (grid < 2) throw Error(ErrorCode::InvalidArgument, "grid must be at least 2");
    const BBox box = tight_bbox(ink);
    if (box.empty()) throw Error(ErrorCode::InvalidArgument, "cannot normalise an empty glyph");
    const int w = box.width();
    const int h = box.height();
    const auto xs = cell_spans(w, grid);
    const auto ys = cell_spans(h, grid);

    // Horizontal pass: per source row, ink area falling in each cell column.
    std::vector<double> rows(std::size_t(h) * grid, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int gx = 0; gx < grid; ++gx) {
            double s = 0.0;
            for (const Span& sp : xs[gx]) s += sp.weight * ink.at(box.x_min + sp.pixel, box.y_min + y);
            rows[std::size_t(y) * grid + gx] = s;
        }
    }
    const double cell_area = (double(w) / grid) * (double(h) / grid);
    std::vector<double> coverage(std::size_t(grid) * grid, 0.0);
    BitMask out(grid, grid, 0);
    for (int gy = 0; gy < grid; ++gy) {
        for (int gx = 0; gx < grid; ++gx) {
            double s = 0.0;
            for (const Span& sp : ys[gy]) s += sp.weight * rows[std::size_t(sp.pixel) * grid + gx];
            const double c = s / cell_area;
            coverage[std::size_t(gy) * grid + gx] = c;
            out.at(gx, gy) = c >= 0.5;
        }
    }

    auto force = [&](bool row, int index) {
        int best = -1;
        double best_c = 0.0;
        bool any = false;
        for (int i = 0; i < grid; ++i) {
            const int x = row ? i : index;
            const int y = row ? index : i;
            if (out.at(x, y)) any = true;
            const double c = coverage[std::size_t(y) * grid + x];
            if (c > best_c) {
                best_c = c;
                best = i;
            }
        }
        if (!any && best >= 0) {
            if (row) out.at(best, index) = 1;
            else out.at(index, best) = 1;
        }
    };
    force(true, 0);
    force(true, grid - 1);
    force(false, 0);
    force(false, grid - 1);
    return out;
}

GlyphTemplate rasterize_glyph(const Font& font, char category, int grid) {
    const GlyphBitmap glyph = font.render(static_cast<unsigned char>(category), kTemplateRenderHeight);
    GlyphTemplate t;
    t.category = category;
    t.font_id = font.id();
    t.grid = normalize_to_grid(glyph.ink, grid);
    t.hole = hole_mask(t.grid);
    return t;
}

GlyphVoteTable build_vote_table(std::span<const GlyphTemplate> templates) {
    if (templates.empty()) throw Error(ErrorCode::EmptyTemplateSet, "no templates to vote");
    GlyphVoteTable table;
    table.category = templates.front().category;
    table.grid = templates.front().grid.width();
    table.n_templates = static_cast<int>(templates.size());
    if (templates.size() > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "too many templates");
    const std::size_t cells = std::size_t(table.grid) * table.grid;
    table.fg_counts.assign(cells, 0);
    table.hole_counts.assign(cells, 0);
    const auto& kernels = simd::active_kernels();
    for (const GlyphTemplate& t : templates) {
        if (t.category != table.category) {
            throw Error(ErrorCode::InvalidArgument, "templates mix categories");
        }
        if (t.grid.width() != table.grid || t.grid.height() != table.grid || !t.hole.same_shape(t.grid)) {
            throw Error(ErrorCode::InvalidArgument, "templates differ in grid size");
        }
        kernels.accumulate(table.fg_counts.data(), t.grid.data(), cells);
        kernels.accumulate(table.hole_counts.data(), t.hole.data(), cells);
    }
    return table;
}

int min_votes(int n_templates, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 1]");
    for (int c = 0; c <= n_templates; ++c) {
        if (double(c) / n_templates >= tau) return c;
    }
    return n_templates;
}

BitMask consensus_mask(const GlyphVoteTable& table, VoteKind kind, double tau) {
    const int need = min_votes(table.n_templates, tau);
    const auto& counts = kind == VoteKind::Foreground ? table.fg_counts : table.hole_counts;
    BitMask out(table.grid, table.grid, 0);
    simd::active_kernels().threshold(counts.data(), static_cast<std::uint16_t>(need), out.data(), out.size());
    return out;
}

// ---------------------------------------------------------------------------

std::string parse_category_spec(const std::string& spec) {
    std::string chars;
    auto check = [](char c) {
        const auto u = static_cast<unsigned char>(c);
        if (u <= 0x20 || u >= 0x7F) {
            throw Error(ErrorCode::InvalidArgument, "category spec accepts printable ASCII without spaces");
        }
    };
    for (std::size_t i = 0; i < spec.size(); ++i) {
        check(spec[i]);
        if (i + 2 < spec.size() && spec[i + 1] == '-') {
            const char lo = spec[i];
            const char hi = spec[i + 2];
            check(hi);
            if (hi < lo) throw Error(ErrorCode::InvalidArgument, std::string("reversed range ") + lo + "-" + hi);
            for (char c = lo; c <= hi; ++c) chars.push_back(c);
            i += 2;
        } else {
            chars.push_back(spec[i]);
        }
    }
    std::sort(chars.begin(), chars.end());
    chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
    if (chars.empty()) throw Error(ErrorCode::InvalidArgument, "empty category spec");
    return chars;
}

BankBuild build_template_bank(const std::filesystem::path& font_dir, const std::string& categories,
                              int grid, int threads) {
    return build_template_bank(list_font_files(font_dir), categories, grid, threads);
}

BankBuild build_template_bank(const std::vector<std::filesystem::path>& fonts,
                              const std::string& categories, int grid, int threads) {
    const std::string cats = parse_category_spec(categories);
    const std::size_t n_fonts = fonts.size();

    // results[font][category]; filled by workers, one font per task.
    std::vector<std::vector<std::optional<GlyphTemplate>>> results(n_fonts);
    std::vector<std::vector<BuildFailure>> failures(n_fonts);
    std::vector<bool> loaded(n_fonts, false);
    std::vector<std::string> ids(n_fonts);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t f = next++; f < n_fonts; f = next++) {
            results[f].resize(cats.size());
            ids[f] = fonts[f].stem().string();
            Font font = [&]() -> Font {
                try {
                    return Font::load(fonts[f]);
                } catch (const Error& e) {
                    failures[f].push_back({ids[f], '\0', e.what()});
                    throw;
                }
            }();
            loaded[f] = true;
            for (std::size_t c = 0; c < cats.size(); ++c) {
                try {
                    results[f][c] = rasterize_glyph(font, cats[c], grid);
                } catch (const Error& e) {
                    failures[f].push_back({ids[f], cats[c], e.what()});
                }
            }
        }
    };
    auto guarded = [&] {
        for (;;) {
            try {
                worker();
                return;
            } catch (const Error&) {
                // font failed to load; its slot already records why
            }
        }
    };
    int n_threads = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    n_threads = std::min<int>(n_threads, static_cast<int>(std::max<std::size_t>(1, n_fonts)));
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(guarded);
    }

    BankBuild build;
    build.bank.grid = grid;
    int usable = 0;
    for (std::size_t f = 0; f < n_fonts; ++f) {
        const bool any = std::any_of(results[f].begin(), results[f].end(), [](const auto& t) { return t.has_value(); });
        if (loaded[f]) build.report.fonts_loaded.push_back(ids[f]);
        if (loaded[f] && any) ++usable;
        for (auto& fail : failures[f]) build.report.failures.push_back(std::move(fail));
    }
    if (usable < 2) {
        throw Error(ErrorCode::InsufficientFonts,
                    "need at least 2 usable fonts, found " + std::to_string(usable));
    }
    build.bank.n_fonts = usable;
    for (std::size_t c = 0; c < cats.size(); ++c) {
        std::vector<GlyphTemplate> set;
        for (std::size_t f = 0; f < n_fonts; ++f) {
            if (c < results[f].size() && results[f][c]) set.push_back(*results[f][c]);
        }
        if (set.size() < 2) {
            build.report.skipped_categories.push_back(cats[c]);
            continue;
        }
        build.bank.tables.emplace(cats[c], build_vote_table(set));
    }
    return build;
}

// ---------------------------------------------------------------------------
// Bank file layout (all integers little-endian):
//   "GLYPHBNK" | u32 version=1 | u32 grid | u32 n_fonts | u32 n_tables
//   per table: u8 category | 3 x u8 zero | u32 n_templates
//              | u16 fg_counts[grid*grid] | u16 hole_counts[grid*grid]

namespace {

constexpr char kBankMagic[8] = {'G', 'L', 'Y', 'P', 'H', 'B', 'N', 'K'};
constexpr std::uint32_t kBankVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        const std::uint16_t v = bytes_[pos_] | (std::uint16_t(bytes_[pos_ + 1]) << 8);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw Error(ErrorCode::ParseError, "template bank truncated");
    }
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_bank(const TemplateBank& bank) {
    std::vector<std::uint8_t> out(std::begin(kBankMagic), std::end(kBankMagic));
    put_u32(out, kBankVersion);
    put_u32(out, static_cast<std::uint32_t>(bank.grid));
    put_u32(out, static_cast<std::uint32_t>(bank.n_fonts));
    put_u32(out, static_cast<std::uint32_t>(bank.tables.size()));
    for (const auto& [cat, table] : bank.tables) {
        out.push_back(static_cast<std::uint8_t>(cat));
        out.insert(out.end(), 3, 0);
        put_u32(out, static_cast<std::uint32_t>(table.n_templates));
        for (auto v : table.fg_counts) put_u16(out, v);
        for (auto v : table.hole_counts) put_u16(out, v);
    }
    return out;
}

TemplateBank deserialize_bank(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || !std::equal(std::begin(kBankMagic), std::end(kBankMagic), bytes.begin())) {
        throw Error(ErrorCode::ParseError, "not a template bank file");
    }
    std::vector<std::uint8_t> body(bytes.begin() + 8, bytes.end());
    Reader r(body);
    const std::uint32_t version = r.u32();
    if (version != kBankVersion) {
        throw Error(ErrorCode::SchemaError, "unsupported template bank version " + std::to_string(version));
    }
    TemplateBank bank;
    bank.grid = static_cast<int>(r.u32());
    bank.n_fonts = static_cast<int>(r.u32());
    if (bank.grid < 2 || bank.grid > 4096) throw Error(ErrorCode::ParseError, "implausible grid size");
    const std::uint32_t n_tables = r.u32();
    const std::size_t cells = std::size_t(bank.grid) * bank.grid;
    for (std::uint32_t t = 0; t < n_tables; ++t) {
        GlyphVoteTable table;
        table.category = static_cast<char>(r.u8());
        for (int i = 0; i < 3; ++i) r.u8();
        table.grid = bank.grid;
        table.n_templates = static_cast<int>(r.u32());
        if (table.n_templates < 1) throw Error(ErrorCode::ParseError, "table without templates");
        table.fg_counts.resize(cells);
        table.hole_counts.resize(cells);
        for (auto& v : table.fg_counts) v = r.u16();
        for (auto& v : table.hole_counts) v = r.u16();
        for (std::size_t i = 0; i < cells; ++i) {
            if (table.fg_counts[i] + table.hole_counts[i] > table.n_templates) {
                throw Error(ErrorCode::ParseError, "vote counts exceed template count");
            }
        }
        if (!bank.tables.emplace(table.category, std::move(table)).second) {
            throw Error(ErrorCode::ParseError, "duplicate category in template bank");
        }
    }
    if (!r.done()) throw Error(ErrorCode::ParseError, "trailing bytes after template bank");
    return bank;
}

void save_bank(const std::filesystem::path& path, const TemplateBank& bank) {
    write_file(path, serialize_bank(bank));
}

TemplateBank load_bank(const std::filesystem::path& path) { return deserialize_bank(read_file(path)); }

}  // namespace glyphseg

#pragma once

// Expensive shared inputs, built once per test binary.

#include <unistd.h>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "glyphseg/backend/scene.hpp"
#include "glyphseg/glyph/templates.hpp"

namespace glyphseg::testing {

inline const std::filesystem::path& font_root() {
    static const std::filesystem::path root = GLYPHSEG_FONT_DIR;
    return root;
}

inline const TemplateBank& shared_bank() {
    static const TemplateBank bank = build_template_bank(font_root() / "bank", kDefaultCategories).bank;
    return bank;
}

inline const std::vector<Font>& heldout_fonts() {
    static const std::vector<Font> fonts = load_fonts(font_root() / "heldout");
    return fonts;
}

inline const Font& heldout_font(const std::string& id) {
    for (const Font& f : heldout_fonts()) {
        if (f.id() == id) return f;
    }
    throw std::runtime_error("no held-out font " + id);
}

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("glyphseg_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace glyphseg::testing

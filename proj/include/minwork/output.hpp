#pragma once

// Output plumbing: atomic file writes (temp + rename) and small CSV helpers.
// Every artifact carries a schema_version so sweep outputs outlive revisions.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace minwork::io {

inline constexpr int schema_version = 1;

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

class Csv {
  public:
    explicit Csv(std::string header) {
        os_.precision(17);
        os_ << "# schema_version=" << schema_version << '\n' << header << '\n';
    }

    template <class... Ts>
    void row(Ts... vals) {
        bool first = true;
        ((os_ << (first ? "" : ","), first = false, os_ << vals), ...);
        os_ << '\n';
    }

    std::string str() const { return os_.str(); }

  private:
    std::ostringstream os_;
};

} // namespace minwork::io

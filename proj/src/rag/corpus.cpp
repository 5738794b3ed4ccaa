#include "fairaudit/rag/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace fairaudit::rag {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

SourceDocument parse_document(std::string id, const std::string& raw) {
  SourceDocument doc;
  doc.id = std::move(id);
  doc.title = doc.id;

  std::string_view body(raw);
  if (body.starts_with("---\n") || body.starts_with("---\r\n")) {
    const auto first_nl = body.find('\n');
    auto close = body.find("\n---", first_nl);
    if (close != std::string_view::npos) {
      std::istringstream header(std::string(body.substr(first_nl + 1, close - first_nl - 1)));
      std::string line;
      while (std::getline(header, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        const std::string key = trim(std::string_view(line).substr(0, colon));
        const std::string value = trim(std::string_view(line).substr(colon + 1));
        if (key == "title" && !value.empty()) {
          doc.title = value;
        } else if (key == "tags") {
          std::istringstream tags(value);
          std::string tag;
          while (std::getline(tags, tag, ',')) {
            if (auto t = trim(tag); !t.empty()) doc.tags.insert(t);
          }
        }
      }
      auto rest = body.find('\n', close + 1);
      body = rest == std::string_view::npos ? std::string_view() : body.substr(rest + 1);
    }
  }
  doc.text = std::string(body);
  return doc;
}

std::vector<SourceDocument> ingest_corpus(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw RagError("corpus directory unreadable: " + dir.string());

  std::vector<fs::path> files;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const auto ext = it->path().extension().string();
    if (ext == ".txt" || ext == ".md") files.push_back(it->path());
  }
  if (ec) throw RagError("corpus directory unreadable: " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  std::vector<SourceDocument> docs;
  std::set<std::string> ids;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw RagError("cannot read " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    SourceDocument doc = parse_document(file.stem().string(), buf.str());
    if (blank(doc.text)) {
      spdlog::warn("skipping empty corpus file {}", file.string());
      continue;
    }
    if (!ids.insert(doc.id).second) throw RagError("duplicate document id '" + doc.id + "'");
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw RagError("no usable documents in " + dir.string());
  return docs;
}

}  // namespace fairaudit::rag

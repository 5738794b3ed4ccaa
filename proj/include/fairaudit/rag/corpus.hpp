#pragma once

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairaudit::rag {

class RagError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceDocument {
  /// Filename stem.
  std::string id;
  std::string title;
  std::string text;
  std::set<std::string> tags;
};

/// Loads every .txt/.md file in `dir`, ordered by filename.
///
/// A file may open with a front-matter block:
///
///     ---
///     title: Insurance status and stage at diagnosis
///     tags: disparity, access
///     ---
///
/// Files whose body is empty or whitespace are skipped with a warning.
/// Throws RagError if the directory is unreadable, two files share a stem,
/// or no usable document remains.
std::vector<SourceDocument> ingest_corpus(const std::filesystem::path& dir);

/// Splits front matter from the body. Exposed for tests.
SourceDocument parse_document(std::string id, const std::string& raw);

}  // namespace fairaudit::rag

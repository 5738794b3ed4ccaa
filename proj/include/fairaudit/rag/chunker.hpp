#pragma once

#include <string>
#include <vector>

#include "fairaudit/rag/corpus.hpp"

namespace fairaudit::rag {

/// A window of a document. Offsets count Unicode code points, not bytes.
struct Chunk {
  std::string chunk_id;
  std::string source_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  bool operator==(const Chunk&) const = default;
};

/// "<source_id>#<ordinal, zero-padded to 4>", so lexicographic order of ids
/// within one source follows document order.
std::string make_chunk_id(const std::string& source_id, std::size_t ordinal);

/// Number of code points in a UTF-8 string. Stray continuation bytes attach
/// to the preceding code point.
std::size_t count_code_points(const std::string& text);

/// Fixed windows of `size` code points with stride `size - overlap`; the
/// last window ends at the end of the text and may be shorter.
/// Throws RagError unless 0 <= overlap < size.
std::vector<Chunk> chunk_document(const SourceDocument& doc, std::size_t size,
                                  std::size_t overlap);

}  // namespace fairaudit::rag

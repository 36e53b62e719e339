#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "discrimq/corpus/region.hpp"

namespace discrimq::corpus {

enum class Profile { real, synthetic };

std::string profile_name(Profile p);
Profile parse_profile(std::string const& name);

/// Feature length D per region/image vector: 2048 for real, 25 for the
/// default synthetic micro-world (sum of its family sizes).
std::size_t default_feature_dim(Profile p);

struct IngestOptions {
    std::size_t feature_dim = 0;
    /// Feature-length mismatches throw SchemaError when set; otherwise the
    /// record is rejected and counted like a malformed box.
    bool strict_schema = true;
};

struct IngestReport {
    std::size_t regions_accepted = 0;
    std::size_t regions_rejected = 0;
    std::size_t pairs_accepted = 0;
    std::size_t pairs_rejected = 0;
    std::vector<std::string> messages;
};

struct IngestResult {
    CorpusStore store;
    IngestReport report;
};

/// Reads regions.jsonl (and optionally pairs.jsonl) records, one JSON object
/// per line. Missing required fields raise ParseError naming the line.
IngestResult ingest_streams(std::istream& regions, std::istream* pairs, IngestOptions const& options);

/// `dir` holds regions.jsonl and, optionally, pairs.jsonl.
IngestResult ingest_corpus(std::filesystem::path const& dir, IngestOptions const& options);

void dump_regions(std::ostream& out, CorpusStore const& store);
void dump_pairs(std::ostream& out, CorpusStore const& store);
void dump_corpus(std::filesystem::path const& dir, CorpusStore const& store);

}  // namespace discrimq::corpus

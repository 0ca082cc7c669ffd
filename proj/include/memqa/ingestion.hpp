#pragma once

#include <memory>
#include <optional>

#include "memqa/model.hpp"
#include "memqa/providers.hpp"

namespace memqa {

/// DM preprocessing: "<id>, On <date phrase>[, I was at <location>][, <caption>]".
/// The caption comes from the describer; the location clause is present only
/// when geocoding yields a place.
MemoryItem preprocess_dm(const RawRecord& record, ChatProvider& describer,
                         Geocoder& geocoder);

/// SGM preprocessing: id/time/source are copied verbatim from the record;
/// the remaining schema keys come from the describer as a strict key-value
/// document (one retry on malformed output). List values are comma-joined.
MemoryItem preprocess_sgm(const RawRecord& record, ChatProvider& describer,
                          const Schema& schema, Geocoder& geocoder);

/// Canonical text used for embedding and prompting. DM items render as their
/// text; SGM items as "key: value" lines in schema order.
std::string render_item(const MemoryItem& item);

/// Geocoding with a soft failure contract: absent gps or provider failure
/// yields "" (the failure is reported on stderr, never thrown).
std::string resolve_location(const std::optional<GeoPoint>& gps, Geocoder& geocoder);

/// Ingests a whole corpus; output is ordered by record id regardless of
/// worker completion order.
std::vector<MemoryItem> ingest_corpus(const std::vector<RawRecord>& corpus,
                                      MemoryKind kind, const Schema& schema,
                                      ChatProvider& describer, Geocoder& geocoder,
                                      int workers = 1);

}  // namespace memqa

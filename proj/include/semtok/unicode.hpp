#pragma once

#include <cstdint>

namespace semtok {

// Codepoint classification and simple lowercasing, backed by tables
// generated from the Unicode character database (src/unicode_tables.inc).

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);

// Locale-independent single-codepoint lowercase; identity when no simple
// mapping exists.
char32_t to_lower(char32_t cp);

}  // namespace semtok

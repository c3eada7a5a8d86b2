#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace ptforge::util {

// Splits on runs of ASCII whitespace.
std::vector<std::string> SplitWhitespace(std::string_view s);
std::vector<std::string> Split(std::string_view s, char sep);
std::string_view Trim(std::string_view s);

// UTF-8 code points of `s`, each as its own string. Throws DataError on
// malformed input.
std::vector<std::string> Utf8Chars(std::string_view s);

// A header/comment line: "#" alone or "# " followed by anything.
bool IsCommentLine(std::string_view line);

// Reads all lines, stripping a trailing '\r'.
std::vector<std::string> ReadLines(std::istream& in);
std::vector<std::string> ReadFileLines(const std::string& path);
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::string& contents);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

// "%.9g"-style formatting used by every text format.
std::string FormatDouble9(double v);
// Round-trip exact formatting.
std::string FormatDouble17(double v);
double ParseDouble(const std::string& s);

}  // namespace ptforge::util

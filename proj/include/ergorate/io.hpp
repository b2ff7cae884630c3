#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace ergorate {

// Round-trippable decimal form ("%.17g"); infinities as "inf"/"-inf".
std::string fmt(double x);

// CSV with a header row. Rows are written as given; values go through fmt.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& cells);
    void close();

private:
    std::ofstream out_;
    std::string path_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);

std::string read_file(const std::string& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

}  // namespace ergorate

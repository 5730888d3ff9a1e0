#include "moralprobe/csv.hpp"
#include "moralprobe/errors.hpp"

#include <gtest/gtest.h>

#include <sstream>

using moralprobe::DataError;
using moralprobe::SchemaError;
namespace csv = moralprobe::csv;

namespace {

std::vector<std::vector<std::string>> read_all(const std::string &text, char delim = ',') {
    std::istringstream in{text};
    csv::Reader reader{in, delim};
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        rows.push_back(fields);
    }
    return rows;
}

} // namespace

TEST(CsvReader, PlainFieldsAndBlankLines) {
    const auto rows = read_all("a,b,c\n\n1,,3\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "", "3"}));
}

TEST(CsvReader, QuotedFieldsWithDelimiterAndDoubledQuote) {
    const auto rows = read_all("\"x, y\",\"say \"\"hi\"\"\",z\n");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"x, y", "say \"hi\"", "z"}));
}

TEST(CsvReader, CrlfLineEndings) {
    const auto rows = read_all("a,b\r\n1,2\r\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "2"}));
}

TEST(CsvReader, EmbeddedNewlineKeepsRecordStartLine) {
    std::istringstream in{"h1,h2\n\"two\nlines\",x\nlast,row\n"};
    csv::Reader reader{in};
    std::vector<std::string> f;
    ASSERT_TRUE(reader.next(f));
    ASSERT_TRUE(reader.next(f));
    EXPECT_EQ(f[0], "two\nlines");
    EXPECT_EQ(reader.line(), 2u);
    ASSERT_TRUE(reader.next(f));
    EXPECT_EQ(reader.line(), 4u);
}

TEST(CsvReader, UnterminatedQuoteIsDataError) {
    EXPECT_THROW(read_all("\"open,1\n"), DataError);
}

TEST(CsvReader, AlternateDelimiter) {
    const auto rows = read_all("a;b\n1;2\n", ';');
    EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "2"}));
}

TEST(CsvTable, StripsByteOrderMarkFromHeader) {
    std::istringstream in{"\xEF\xBB\xBF" "code,country\n20,Andorra\n"};
    csv::Table table{in};
    EXPECT_EQ(table.column("code"), 0u);
    EXPECT_EQ(table.column("country"), 1u);
    EXPECT_FALSE(table.column("missing").has_value());
}

TEST(CsvTable, FieldCountMismatchNamesLine) {
    std::istringstream in{"a,b\n1,2\n3\n"};
    csv::Table table{in};
    std::vector<std::string> f;
    ASSERT_TRUE(table.next(f));
    try {
        table.next(f);
        FAIL() << "expected DataError";
    } catch (const DataError &e) {
        EXPECT_NE(std::string{e.what()}.find("line 3"), std::string::npos) << e.what();
    }
}

TEST(CsvTable, EmptyInputIsSchemaError) {
    std::istringstream in{""};
    EXPECT_THROW(csv::Table{in}, SchemaError);
}

TEST(CsvWriter, RoundTripsAwkwardFields) {
    const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "multi\nline",
                                          ""};
    std::ostringstream out;
    csv::write_row(out, fields);
    const auto rows = read_all(out.str());
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0], fields);
}

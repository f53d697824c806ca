#include "mashup/contracts.hpp"

#include "parser.hpp"

namespace mashup {

namespace detail {

void parse_unit_header(Parser& p, std::string& package, std::vector<std::string>& imports)
{
    p.expect_keyword("package");
    package = p.expect_ident("package name").text;
    p.accept_punct(";");
    if (!p.at_keyword("require"))
        p.fail("expected at least one 'require'");
    while (p.accept_keyword("require")) {
        imports.push_back(p.expect_string("unit path").text);
        p.accept_punct(";");
    }
}

} // namespace detail

ContractModule parse_contracts(std::string_view text, const std::string& unit)
{
    detail::Parser p(text, unit);
    ContractModule mod;
    mod.source_unit = unit;
    detail::parse_unit_header(p, mod.package_name, mod.imports);

    while (!p.at_end()) {
        ContractContribution contrib;
        contrib.pos = p.peek().pos;
        p.expect_keyword("aspect");
        p.expect_keyword("class");
        contrib.class_name = p.expect_ident("class name").text;
        p.expect_punct("{");
        while (!p.accept_punct("}")) {
            SourcePos pos = p.peek().pos;
            if (p.accept_keyword("inv")) {
                NamedCondition inv;
                inv.pos = pos;
                inv.name = p.expect_ident("invariant name").text;
                p.expect_punct(":");
                inv.body = p.parse_expr();
                p.accept_punct(";");
                contrib.invariants.push_back(std::move(inv));
            } else if (p.at_keyword("pre") || p.at_keyword("post")) {
                bool is_pre = p.next().text == "pre";
                OpCondition cond;
                cond.pos = pos;
                cond.name = p.expect_ident("condition name").text;
                p.expect_keyword("on");
                cond.op_name = p.expect_ident("operation name").text;
                p.expect_punct(":");
                cond.body = p.parse_expr();
                p.accept_punct(";");
                (is_pre ? contrib.pre_conditions : contrib.post_conditions).push_back(std::move(cond));
            } else if (p.at_end()) {
                p.fail("unexpected end of input inside aspect class " + contrib.class_name);
            } else {
                p.fail("expected 'inv', 'pre', 'post' or '}'");
            }
        }
        mod.contributions.push_back(std::move(contrib));
    }
    return mod;
}

} // namespace mashup

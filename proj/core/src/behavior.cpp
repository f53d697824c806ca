#include "mashup/behavior.hpp"

#include "parser.hpp"

namespace mashup {

namespace {

MethodPtr parse_method(detail::Parser& p, SourcePos pos, bool overrides)
{
    auto m = std::make_shared<MethodDef>();
    m->pos = pos;
    m->overrides = overrides;
    m->sig.pos = pos;
    m->sig.name = p.expect_ident("operation name").text;
    m->sig.params = p.parse_params();
    if (p.accept_punct(":"))
        m->sig.return_type = p.parse_type();
    p.expect_keyword("is");
    p.expect_keyword("do");
    m->body = p.parse_block({"end"});
    p.expect_keyword("end");
    return m;
}

} // namespace

BehaviorModule parse_behavior(std::string_view text, const std::string& unit)
{
    detail::Parser p(text, unit);
    BehaviorModule mod;
    mod.source_unit = unit;
    detail::parse_unit_header(p, mod.package_name, mod.imports);

    while (!p.at_end()) {
        AspectClass aspect;
        aspect.pos = p.peek().pos;
        p.expect_keyword("aspect");
        p.expect_keyword("class");
        aspect.class_name = p.expect_ident("class name").text;
        if (p.accept_keyword("inherits")) {
            do {
                aspect.added_supertypes.push_back(p.expect_ident("supertype name").text);
            } while (p.accept_punct(","));
        }
        p.expect_punct("{");
        while (!p.accept_punct("}")) {
            SourcePos pos = p.peek().pos;
            if (p.accept_keyword("attr")) {
                aspect.added_attributes.push_back(p.parse_attribute(pos));
            } else if (p.accept_keyword("ref")) {
                aspect.added_references.push_back(p.parse_reference(pos));
            } else if (p.accept_keyword("method")) {
                aspect.methods.push_back(parse_method(p, pos, true));
            } else if (p.accept_keyword("operation")) {
                aspect.methods.push_back(parse_method(p, pos, false));
            } else if (p.accept_keyword("rename")) {
                Renaming r;
                r.pos = pos;
                r.op = p.expect_ident("operation name").text;
                p.expect_keyword("from");
                r.from_class = p.expect_ident("supertype name").text;
                p.expect_keyword("as");
                r.new_name = p.expect_ident("new name").text;
                p.accept_punct(";");
                aspect.renamings.push_back(std::move(r));
            } else if (p.accept_punct(";")) {
                continue;
            } else if (p.at_end()) {
                p.fail("unexpected end of input inside aspect class " + aspect.class_name);
            } else {
                p.fail("expected 'attr', 'ref', 'method', 'operation', 'rename' or '}'");
            }
        }
        mod.aspects.push_back(std::move(aspect));
    }
    return mod;
}

} // namespace mashup

"""Recursive-descent parser for the CS1 subset of Java.

Produces a full concrete-ish AST: every source token is a leaf node carrying
its text and span, and inner nodes span exactly their leaves. Spans are
offsets into the source text, so slicing the source by a node's span
reproduces its exact bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class JavaSyntaxError(Exception):
    def __init__(self, message: str, offset: int, line: int, col: int):
        super().__init__(f"{message} at line {line}, col {col}")
        self.offset = offset
        self.line = line
        self.col = col


@dataclass
class AstNode:
    kind: str
    children: list["AstNode"] = field(default_factory=list)
    span: tuple[int, int] = (0, 0)
    token_text: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.token_text is not None

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self):
        for node in self.walk():
            if node.is_leaf:
                yield node


KEYWORDS = {
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char",
    "class", "const", "continue", "default", "do", "double", "else", "enum",
    "extends", "final", "finally", "float", "for", "goto", "if", "implements",
    "import", "instanceof", "int", "interface", "long", "native", "new",
    "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while",
}

PRIMITIVE_TYPES = {"boolean", "byte", "char", "double", "float", "int", "long", "short"}

MODIFIERS = {"public", "private", "protected", "static", "final", "abstract"}

# Longest-match operator table; order matters.
OPERATORS = [
    "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^", "~", "?", ":",
]

PUNCT = {"(", ")", "{", "}", "[", "]", ";", ",", "."}


@dataclass
class Token:
    kind: str  # ident / keyword / num / str / char / bool / null / op / punct / eof
    text: str
    start: int
    end: int


def _line_col(source: str, offset: int) -> tuple[int, int]:
    line = source.count("\n", 0, offset) + 1
    col = offset - (source.rfind("\n", 0, offset) + 1) + 1
    return line, col


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c in " \t\r\n":
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                line, col = _line_col(source, i)
                raise JavaSyntaxError("unterminated block comment", i, line, col)
            i = j + 2
            continue
        if c.isalpha() or c == "_" or c == "$":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
            word = source[i:j]
            if word in ("true", "false"):
                kind = "bool"
            elif word == "null":
                kind = "null"
            elif word in KEYWORDS:
                kind = "keyword"
            else:
                kind = "ident"
            tokens.append(Token(kind, word, i, j))
            i = j
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                if source[j] == ".":
                    # ".length" after a number would be malformed anyway; simple rule
                    if j + 1 >= n or not source[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            if j < n and source[j] in "lLfFdD":
                j += 1
            tokens.append(Token("num", source[i:j], i, j))
            i = j
            continue
        if c == '"' or c == "'":
            quote = c
            j = i + 1
            while j < n and source[j] != quote:
                if source[j] == "\\":
                    j += 1
                j += 1
            if j >= n:
                line, col = _line_col(source, i)
                raise JavaSyntaxError("unterminated literal", i, line, col)
            j += 1
            tokens.append(Token("str" if quote == '"' else "char", source[i:j], i, j))
            i = j
            continue
        if c in PUNCT:
            tokens.append(Token("punct", c, i, i + 1))
            i += 1
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token("op", op, i, i + len(op)))
                i += len(op)
                break
        else:
            line, col = _line_col(source, i)
            raise JavaSyntaxError(f"unexpected character {c!r}", i, line, col)
    tokens.append(Token("eof", "", n, n))
    return tokens


def _leaf(kind: str, tok: Token) -> AstNode:
    return AstNode(kind=kind, span=(tok.start, tok.end), token_text=tok.text)


def _node(kind: str, children: list[AstNode]) -> AstNode:
    assert children, "inner node needs children"
    return AstNode(kind=kind, children=children, span=(children[0].span[0], children[-1].span[1]))


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0

    # -- token helpers --

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str) -> JavaSyntaxError:
        tok = self.peek()
        line, col = _line_col(self.source, tok.start)
        shown = tok.text or "<eof>"
        return JavaSyntaxError(f"{message}, found {shown!r}", tok.start, line, col)

    def expect(self, kind: str, text: str | None = None, leaf_kind: str | None = None) -> AstNode:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            raise self.error(f"expected {text or kind}")
        self.advance()
        if leaf_kind is None:
            leaf_kind = {"keyword": "keyword", "op": "op", "punct": "punct"}.get(kind, kind)
        return _leaf(leaf_kind, tok)

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def at_any(self, kind: str, texts) -> bool:
        tok = self.peek()
        return tok.kind == kind and tok.text in texts

    # -- grammar --

    def parse_compilation_unit(self) -> AstNode:
        classes = []
        while not self.at("eof"):
            classes.append(self.parse_class())
        if not classes:
            raise self.error("expected class declaration")
        if len(classes) == 1:
            return classes[0]
        return _node("compilation_unit", classes)

    def parse_class(self) -> AstNode:
        kids = []
        while self.at_any("keyword", MODIFIERS):
            kids.append(self.expect("keyword"))
        kids.append(self.expect("keyword", "class"))
        kids.append(self.expect("ident", leaf_kind="type_name"))
        kids.append(self.expect("punct", "{"))
        while not self.at("punct", "}"):
            kids.append(self.parse_member())
        kids.append(self.expect("punct", "}"))
        return _node("class_decl", kids)

    def parse_member(self) -> AstNode:
        mods = []
        while self.at_any("keyword", MODIFIERS):
            mods.append(self.expect("keyword"))
        type_node = self.parse_type(allow_void=True)
        name_tok = self.peek()
        if name_tok.kind != "ident":
            raise self.error("expected member name")
        if self.peek(1).kind == "punct" and self.peek(1).text == "(":
            name = self.expect("ident", leaf_kind="method_name")
            kids = mods + [type_node, name, self.expect("punct", "(")]
            if not self.at("punct", ")"):
                kids.append(self.parse_param())
                while self.at("punct", ","):
                    kids.append(self.expect("punct", ","))
                    kids.append(self.parse_param())
            kids.append(self.expect("punct", ")"))
            kids.append(self.parse_block())
            return _node("method_decl", kids)
        kids = mods + [type_node] + self.parse_declarators()
        kids.append(self.expect("punct", ";"))
        return _node("field_decl", kids)

    def parse_param(self) -> AstNode:
        kids = [self.parse_type()]
        kids.append(self.expect("ident", leaf_kind="identifier"))
        while self.at("punct", "["):
            kids.append(self.expect("punct", "["))
            kids.append(self.expect("punct", "]"))
        return _node("param", kids)

    def _at_type_start(self) -> bool:
        if self.at_any("keyword", PRIMITIVE_TYPES) or self.at("keyword", "void"):
            return True
        return self.peek().kind == "ident"

    def parse_type(self, allow_void: bool = False) -> AstNode:
        tok = self.peek()
        if tok.kind == "keyword" and (tok.text in PRIMITIVE_TYPES or (allow_void and tok.text == "void")):
            base = self.expect("keyword", leaf_kind="type_name")
        elif tok.kind == "ident":
            base = self.expect("ident", leaf_kind="type_name")
        else:
            raise self.error("expected type")
        kids = [base]
        while self.at("punct", "[") and self.peek(1).text == "]":
            kids.append(self.expect("punct", "["))
            kids.append(self.expect("punct", "]"))
        return _node("type", kids) if len(kids) > 1 else base

    def parse_block(self) -> AstNode:
        kids = [self.expect("punct", "{")]
        while not self.at("punct", "}"):
            kids.append(self.parse_statement())
        kids.append(self.expect("punct", "}"))
        return _node("block", kids)

    def parse_statement(self) -> AstNode:
        if self.at("punct", "{"):
            return self.parse_block()
        if self.at("keyword", "if"):
            return self.parse_if()
        if self.at("keyword", "while"):
            return self.parse_while()
        if self.at("keyword", "for"):
            return self.parse_for()
        if self.at("keyword", "return"):
            kids = [self.expect("keyword", "return")]
            if not self.at("punct", ";"):
                kids.append(self.parse_expression())
            kids.append(self.expect("punct", ";"))
            return _node("return_stmt", kids)
        if self.at("keyword", "break") or self.at("keyword", "continue"):
            kw = self.expect("keyword")
            semi = self.expect("punct", ";")
            return _node(kw.token_text + "_stmt", [kw, semi])
        if self.at("punct", ";"):
            return _node("empty_stmt", [self.expect("punct", ";")])
        decl = self._try_parse_var_decl()
        if decl is not None:
            return decl
        expr = self.parse_expression()
        semi = self.expect("punct", ";")
        return _node("expr_stmt", [expr, semi])

    def _looks_like_var_decl(self) -> bool:
        tok = self.peek()
        if tok.kind == "keyword" and tok.text in PRIMITIVE_TYPES:
            return True
        if tok.kind != "ident":
            return False
        # Ident Ident / Ident[] Ident
        nxt = self.peek(1)
        if nxt.kind == "ident":
            return True
        if nxt.kind == "punct" and nxt.text == "[":
            after = self.peek(2)
            return after.kind == "punct" and after.text == "]"
        return False

    def _try_parse_var_decl(self) -> AstNode | None:
        if not self._looks_like_var_decl():
            return None
        kids = [self.parse_type()] + self.parse_declarators()
        kids.append(self.expect("punct", ";"))
        return _node("local_var_decl", kids)

    def parse_declarators(self) -> list[AstNode]:
        decls = [self.parse_declarator()]
        while self.at("punct", ","):
            decls.append(self.expect("punct", ","))
            decls.append(self.parse_declarator())
        return decls

    def parse_declarator(self) -> AstNode:
        kids = [self.expect("ident", leaf_kind="identifier")]
        while self.at("punct", "[") and self.peek(1).text == "]":
            kids.append(self.expect("punct", "["))
            kids.append(self.expect("punct", "]"))
        if self.at("op", "="):
            kids.append(self.expect("op", "="))
            kids.append(self.parse_expression())
        return _node("var_declarator", kids)

    def parse_if(self) -> AstNode:
        kids = [
            self.expect("keyword", "if"),
            self.expect("punct", "("),
            self.parse_expression(),
            self.expect("punct", ")"),
            self.parse_statement(),
        ]
        if self.at("keyword", "else"):
            kids.append(self.expect("keyword", "else"))
            kids.append(self.parse_statement())
        return _node("if_stmt", kids)

    def parse_while(self) -> AstNode:
        kids = [
            self.expect("keyword", "while"),
            self.expect("punct", "("),
            self.parse_expression(),
            self.expect("punct", ")"),
            self.parse_statement(),
        ]
        return _node("while_stmt", kids)

    def parse_for(self) -> AstNode:
        kw = self.expect("keyword", "for")
        header_kids = [self.expect("punct", "(")]
        if not self.at("punct", ";"):
            decl = self._try_parse_var_decl()
            if decl is not None:
                header_kids.append(decl)  # consumes its own ';'
            else:
                header_kids.append(self.parse_expression())
                header_kids.append(self.expect("punct", ";"))
        else:
            header_kids.append(self.expect("punct", ";"))
        if not self.at("punct", ";"):
            header_kids.append(self.parse_expression())
        header_kids.append(self.expect("punct", ";"))
        if not self.at("punct", ")"):
            header_kids.append(self.parse_expression())
            while self.at("punct", ","):
                header_kids.append(self.expect("punct", ","))
                header_kids.append(self.parse_expression())
        header_kids.append(self.expect("punct", ")"))
        header = _node("for_header", header_kids)
        body = self.parse_statement()
        return _node("for_stmt", [kw, header, body])

    # -- expressions --

    ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}

    def parse_expression(self) -> AstNode:
        left = self.parse_ternary()
        if self.at_any("op", self.ASSIGN_OPS):
            op = self.expect("op")
            right = self.parse_expression()
            return _node("assignment", [left, op, right])
        return left

    def parse_ternary(self) -> AstNode:
        cond = self.parse_binary(0)
        if self.at("op", "?"):
            kids = [cond, self.expect("op", "?"), self.parse_expression(),
                    self.expect("op", ":"), self.parse_ternary()]
            return _node("ternary_expr", kids)
        return cond

    BINARY_LEVELS = [
        {"||"},
        {"&&"},
        {"|"},
        {"^"},
        {"&"},
        {"==", "!="},
        {"<", ">", "<=", ">="},
        {"<<", ">>"},
        {"+", "-"},
        {"*", "/", "%"},
    ]

    def parse_binary(self, level: int) -> AstNode:
        if level >= len(self.BINARY_LEVELS):
            return self.parse_unary()
        left = self.parse_binary(level + 1)
        ops = self.BINARY_LEVELS[level]
        while self.at_any("op", ops):
            op = self.expect("op")
            right = self.parse_binary(level + 1)
            left = _node("binary_expr", [left, op, right])
        return left

    def parse_unary(self) -> AstNode:
        if self.at_any("op", {"!", "-", "+", "~", "++", "--"}):
            op = self.expect("op")
            operand = self.parse_unary()
            return _node("unary_expr", [op, operand])
        return self.parse_postfix()

    def parse_postfix(self) -> AstNode:
        node = self.parse_primary()
        while True:
            if self.at("punct", "["):
                kids = [node, self.expect("punct", "["), self.parse_expression(),
                        self.expect("punct", "]")]
                node = _node("array_access", kids)
            elif self.at("punct", "."):
                dot = self.expect("punct", ".")
                name_tok = self.peek()
                if name_tok.kind != "ident":
                    raise self.error("expected member name after '.'")
                if self.peek(1).kind == "punct" and self.peek(1).text == "(":
                    name = self.expect("ident", leaf_kind="method_name")
                    kids = [node, dot, name] + self.parse_args()
                    node = _node("call", kids)
                else:
                    name = self.expect("ident", leaf_kind="identifier")
                    node = _node("field_access", [node, dot, name])
            elif self.at_any("op", {"++", "--"}):
                op = self.expect("op")
                node = _node("unary_expr", [node, op])
            else:
                return node

    def parse_args(self) -> list[AstNode]:
        kids = [self.expect("punct", "(")]
        if not self.at("punct", ")"):
            kids.append(self.parse_expression())
            while self.at("punct", ","):
                kids.append(self.expect("punct", ","))
                kids.append(self.parse_expression())
        kids.append(self.expect("punct", ")"))
        return kids

    def parse_primary(self) -> AstNode:
        tok = self.peek()
        if tok.kind == "num":
            return self.expect("num", leaf_kind="num_lit")
        if tok.kind == "str":
            return self.expect("str", leaf_kind="str_lit")
        if tok.kind == "char":
            return self.expect("char", leaf_kind="char_lit")
        if tok.kind == "bool":
            return self.expect("bool", leaf_kind="bool_lit")
        if tok.kind == "null":
            return self.expect("null", leaf_kind="null_lit")
        if tok.kind == "punct" and tok.text == "(":
            kids = [self.expect("punct", "("), self.parse_expression(), self.expect("punct", ")")]
            return _node("paren_expr", kids)
        if tok.kind == "keyword" and tok.text == "new":
            return self.parse_new()
        if tok.kind == "keyword" and tok.text == "this":
            return self.expect("keyword")
        if tok.kind == "ident":
            if self.peek(1).kind == "punct" and self.peek(1).text == "(":
                name = self.expect("ident", leaf_kind="method_name")
                return _node("call", [name] + self.parse_args())
            return self.expect("ident", leaf_kind="identifier")
        raise self.error("expected expression")

    def parse_new(self) -> AstNode:
        kids = [self.expect("keyword", "new")]
        base_tok = self.peek()
        if base_tok.kind == "keyword" and base_tok.text in PRIMITIVE_TYPES:
            kids.append(self.expect("keyword", leaf_kind="type_name"))
        elif base_tok.kind == "ident":
            kids.append(self.expect("ident", leaf_kind="type_name"))
        else:
            raise self.error("expected type after 'new'")
        if self.at("punct", "["):
            while self.at("punct", "["):
                kids.append(self.expect("punct", "["))
                if not self.at("punct", "]"):
                    kids.append(self.parse_expression())
                kids.append(self.expect("punct", "]"))
            return _node("new_array", kids)
        kids.extend(self.parse_args())
        return _node("new_object", kids)


def parse_program(source: str, language: str = "java") -> AstNode:
    """Parse a complete source file and return the AST root."""
    if language != "java":
        raise ValueError(f"unsupported language: {language!r}")
    if not source.strip():
        raise ValueError("empty source")
    parser = _Parser(source)
    root = parser.parse_compilation_unit()
    return root


def parse_statements(source: str) -> AstNode:
    """Parse a bare statement sequence (used for code fragments)."""
    if not source.strip():
        raise ValueError("empty source")
    parser = _Parser(source)
    stmts = []
    while not parser.at("eof"):
        stmts.append(parser.parse_statement())
    if len(stmts) == 1:
        return stmts[0]
    return _node("statement_seq", stmts)

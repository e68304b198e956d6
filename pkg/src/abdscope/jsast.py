"""ECMAScript parser producing structure-only syntax trees.

Covers the language subset that page scripts in practice use: ES5 plus the
common ES2015+ constructs (let/const, arrows, classes, template literals,
spread/rest, destructuring, optional chaining, async/await in their simple
forms). Trees keep node types and source-ordered children only; identifier
names, literal values, and operators are carried as debug info and never
influence the pre-order type sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import JsParseError

KEYWORDS = frozenset(
    """var let const function if else for while do return break continue new
    delete typeof instanceof void in this null true false switch case default
    throw try catch finally with debugger class extends super yield await
    import export""".split()
)

_PUNCTUATORS = [
    ">>>=",
    "...",
    "===",
    "!==",
    ">>>",
    "**=",
    "<<=",
    ">>=",
    "&&=",
    "||=",
    "??=",
    "==",
    "!=",
    "<=",
    ">=",
    "&&",
    "||",
    "??",
    "?.",
    "++",
    "--",
    "+=",
    "-=",
    "*=",
    "/=",
    "%=",
    "&=",
    "|=",
    "^=",
    "=>",
    "<<",
    ">>",
    "**",
    "{",
    "}",
    "(",
    ")",
    "[",
    "]",
    ";",
    ",",
    "<",
    ">",
    "+",
    "-",
    "*",
    "/",
    "%",
    "&",
    "|",
    "^",
    "!",
    "~",
    "?",
    ":",
    "=",
    ".",
]

# Binary operator precedence (higher binds tighter); ** handled right-assoc.
_BINARY_PRECEDENCE = {
    "??": 1,
    "||": 2,
    "&&": 3,
    "|": 4,
    "^": 5,
    "&": 6,
    "==": 7,
    "!=": 7,
    "===": 7,
    "!==": 7,
    "<": 8,
    ">": 8,
    "<=": 8,
    ">=": 8,
    "in": 8,
    "instanceof": 8,
    "<<": 9,
    ">>": 9,
    ">>>": 9,
    "+": 10,
    "-": 10,
    "*": 11,
    "/": 11,
    "%": 11,
    "**": 12,
}

_LOGICAL_OPS = {"||", "&&", "??"}

_ASSIGN_OPS = {
    "=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", ">>>=", "&=", "|=", "^=",
    "**=", "&&=", "||=", "??=",
}


@dataclass
class Node:
    type: str
    children: list["Node"] = field(default_factory=list)
    info: str | None = None

    def preorder(self):
        """Depth-first pre-order node-type labels."""
        yield self.type
        for child in self.children:
            yield from child.preorder()


@dataclass
class Token:
    type: str  # ident | keyword | num | str | regex | punct | template_* | eof
    value: str
    line: int
    col: int
    newline_before: bool


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$" or ord(ch) > 127


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$" or ord(ch) > 127


class _Lexer:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0
        self.line = 1
        self.line_start = 0
        self.newline_before = False
        self.prev: Token | None = None
        # Brace depth per open template substitution.
        self.template_depth: list[int] = []

    def error(self, message: str) -> JsParseError:
        return JsParseError(message, self.line, self.pos - self.line_start + 1)

    def _newline(self, at: int) -> None:
        self.line += 1
        self.line_start = at + 1
        self.newline_before = True

    def _skip_blank(self) -> None:
        src, n = self.src, len(self.src)
        while self.pos < n:
            ch = src[self.pos]
            if ch == "\n":
                self._newline(self.pos)
                self.pos += 1
            elif ch in " \t\r\f\v ﻿" or (ord(ch) > 127 and ch.isspace()):
                self.pos += 1
            elif src.startswith("//", self.pos) or src.startswith("<!--", self.pos):
                while self.pos < n and src[self.pos] != "\n":
                    self.pos += 1
            elif src.startswith("-->", self.pos) and (
                self.pos == self.line_start or src[self.line_start : self.pos].isspace()
            ):
                while self.pos < n and src[self.pos] != "\n":
                    self.pos += 1
            elif src.startswith("/*", self.pos):
                end = src.find("*/", self.pos + 2)
                if end < 0:
                    raise self.error("unterminated block comment")
                for i in range(self.pos, end):
                    if src[i] == "\n":
                        self._newline(i)
                self.pos = end + 2
            else:
                break

    def _regex_allowed(self) -> bool:
        prev = self.prev
        if prev is None:
            return True
        if prev.type in ("num", "str", "regex", "template_full", "template_tail"):
            return False
        if prev.type == "ident":
            return False
        if prev.type == "keyword":
            return prev.value not in ("this", "true", "false", "null", "super")
        if prev.type == "punct":
            return prev.value not in (")", "]", "++", "--")
        return True

    def next(self) -> Token:
        self.newline_before = False
        self._skip_blank()
        token = self._scan()
        self.prev = token
        return token

    def _make(self, type_: str, value: str, line: int, col: int) -> Token:
        return Token(type_, value, line, col, self.newline_before)

    def _scan(self) -> Token:
        src, n = self.src, len(self.src)
        if self.pos >= n:
            return self._make("eof", "", self.line, self.pos - self.line_start + 1)
        line, col = self.line, self.pos - self.line_start + 1
        ch = src[self.pos]

        if ch == "`":
            self.pos += 1
            return self._template_chunk(line, col, head=True)

        if ch == "}" and self.template_depth and self.template_depth[-1] == 0:
            self.template_depth.pop()
            self.pos += 1
            return self._template_chunk(line, col, head=False)

        if _is_ident_start(ch) and not ch.isdigit():
            start = self.pos
            while self.pos < n and _is_ident_part(src[self.pos]):
                self.pos += 1
            word = src[start : self.pos]
            return self._make("keyword" if word in KEYWORDS else "ident", word, line, col)

        if ch.isdigit() or (ch == "." and self.pos + 1 < n and src[self.pos + 1].isdigit()):
            return self._number(line, col)

        if ch in "'\"":
            return self._string(ch, line, col)

        if ch == "/" and self._regex_allowed():
            return self._regex(line, col)

        for punct in _PUNCTUATORS:
            if src.startswith(punct, self.pos):
                if punct == "?." and self.pos + 2 < n and src[self.pos + 2].isdigit():
                    continue  # a ?. b : c with numeric consequent
                self.pos += len(punct)
                if punct == "{" and self.template_depth:
                    self.template_depth[-1] += 1
                elif punct == "}" and self.template_depth:
                    self.template_depth[-1] -= 1
                return self._make("punct", punct, line, col)

        raise self.error(f"unexpected character {ch!r}")

    def _template_chunk(self, line: int, col: int, head: bool) -> Token:
        src, n = self.src, len(self.src)
        start = self.pos
        while self.pos < n:
            ch = src[self.pos]
            if ch == "\\":
                self.pos += 2
                continue
            if ch == "\n":
                self._newline(self.pos)
                self.pos += 1
                continue
            if ch == "`":
                self.pos += 1
                kind = "template_full" if head else "template_tail"
                return self._make(kind, src[start : self.pos - 1], line, col)
            if ch == "$" and self.pos + 1 < n and src[self.pos + 1] == "{":
                value = src[start : self.pos]
                self.pos += 2
                self.template_depth.append(0)
                kind = "template_head" if head else "template_middle"
                return self._make(kind, value, line, col)
            self.pos += 1
        raise self.error("unterminated template literal")

    def _number(self, line: int, col: int) -> Token:
        src, n = self.src, len(self.src)
        start = self.pos
        if src[self.pos] == "0" and self.pos + 1 < n and src[self.pos + 1] in "xXoObB":
            self.pos += 2
            while self.pos < n and (src[self.pos].isalnum()):
                self.pos += 1
            return self._make("num", src[start : self.pos], line, col)
        while self.pos < n and src[self.pos].isdigit():
            self.pos += 1
        if self.pos < n and src[self.pos] == ".":
            self.pos += 1
            while self.pos < n and src[self.pos].isdigit():
                self.pos += 1
        if self.pos < n and src[self.pos] in "eE":
            self.pos += 1
            if self.pos < n and src[self.pos] in "+-":
                self.pos += 1
            if self.pos >= n or not src[self.pos].isdigit():
                raise self.error("malformed exponent")
            while self.pos < n and src[self.pos].isdigit():
                self.pos += 1
        return self._make("num", src[start : self.pos], line, col)

    def _string(self, quote: str, line: int, col: int) -> Token:
        src, n = self.src, len(self.src)
        start = self.pos
        self.pos += 1
        while self.pos < n:
            ch = src[self.pos]
            if ch == "\\":
                if self.pos + 1 < n and src[self.pos + 1] == "\n":
                    self._newline(self.pos + 1)
                self.pos += 2
                continue
            if ch == quote:
                self.pos += 1
                return self._make("str", src[start : self.pos], line, col)
            if ch == "\n":
                raise self.error("unterminated string literal")
            self.pos += 1
        raise self.error("unterminated string literal")

    def _regex(self, line: int, col: int) -> Token:
        src, n = self.src, len(self.src)
        start = self.pos
        self.pos += 1
        in_class = False
        while self.pos < n:
            ch = src[self.pos]
            if ch == "\\":
                self.pos += 2
                continue
            if ch == "\n":
                raise self.error("unterminated regular expression")
            if ch == "[":
                in_class = True
            elif ch == "]":
                in_class = False
            elif ch == "/" and not in_class:
                self.pos += 1
                while self.pos < n and _is_ident_part(src[self.pos]):
                    self.pos += 1
                return self._make("regex", src[start : self.pos], line, col)
            self.pos += 1
        raise self.error("unterminated regular expression")


class _Parser:
    def __init__(self, src: str):
        self.lexer = _Lexer(src)
        self.tok = self.lexer.next()
        self.peeked: Token | None = None

    # -- token plumbing ----------------------------------------------------

    def error(self, message: str) -> JsParseError:
        return JsParseError(message, self.tok.line, self.tok.col)

    def advance(self) -> Token:
        prev = self.tok
        if self.peeked is not None:
            self.tok = self.peeked
            self.peeked = None
        else:
            self.tok = self.lexer.next()
        return prev

    def peek(self) -> Token:
        if self.peeked is None:
            self.peeked = self.lexer.next()
        return self.peeked

    def at_punct(self, *values: str) -> bool:
        return self.tok.type == "punct" and self.tok.value in values

    def at_keyword(self, *values: str) -> bool:
        return self.tok.type == "keyword" and self.tok.value in values

    def expect_punct(self, value: str) -> Token:
        if not self.at_punct(value):
            raise self.error(f"expected {value!r}, found {self.tok.value!r}")
        return self.advance()

    def expect_keyword(self, value: str) -> Token:
        if not self.at_keyword(value):
            raise self.error(f"expected {value!r}, found {self.tok.value!r}")
        return self.advance()

    def ident_name(self) -> str:
        if self.tok.type != "ident":
            raise self.error(f"expected identifier, found {self.tok.value!r}")
        return self.advance().value

    def consume_semicolon(self) -> None:
        """Explicit ';' or an automatic-insertion point."""
        if self.at_punct(";"):
            self.advance()
            return
        if self.at_punct("}") or self.tok.type == "eof" or self.tok.newline_before:
            return
        raise self.error(f"expected ';', found {self.tok.value!r}")

    # -- program -----------------------------------------------------------

    def parse_program(self) -> Node:
        body = []
        while self.tok.type != "eof":
            body.append(self.parse_statement())
        return Node("Program", body)

    # -- statements ----------------------------------------------------------

    def parse_statement(self) -> Node:
        tok = self.tok
        if tok.type == "punct":
            if tok.value == "{":
                return self.parse_block()
            if tok.value == ";":
                self.advance()
                return Node("EmptyStatement")
        if tok.type == "keyword":
            handler = {
                "var": self.parse_variable_statement,
                "let": self.parse_variable_statement,
                "const": self.parse_variable_statement,
                "function": lambda: self.parse_function(declaration=True),
                "if": self.parse_if,
                "for": self.parse_for,
                "while": self.parse_while,
                "do": self.parse_do_while,
                "return": self.parse_return,
                "break": lambda: self.parse_break_continue("BreakStatement"),
                "continue": lambda: self.parse_break_continue("ContinueStatement"),
                "throw": self.parse_throw,
                "try": self.parse_try,
                "switch": self.parse_switch,
                "with": self.parse_with,
                "debugger": self.parse_debugger,
                "class": lambda: self.parse_class(declaration=True),
                "import": self.parse_import,
                "export": self.parse_export,
            }.get(tok.value)
            if handler is not None:
                return handler()
        if tok.type == "ident":
            if tok.value == "async" and self.peek().type == "keyword" and self.peek().value == "function":
                self.advance()
                return self.parse_function(declaration=True)
            if self.peek().type == "punct" and self.peek().value == ":":
                label = Node("Identifier", info=self.advance().value)
                self.advance()
                return Node("LabeledStatement", [label, self.parse_statement()])
        expr = self.parse_expression()
        self.consume_semicolon()
        return Node("ExpressionStatement", [expr])

    def parse_block(self) -> Node:
        self.expect_punct("{")
        body = []
        while not self.at_punct("}"):
            if self.tok.type == "eof":
                raise self.error("unterminated block")
            body.append(self.parse_statement())
        self.advance()
        return Node("BlockStatement", body)

    def parse_variable_statement(self) -> Node:
        node = self.parse_variable_declaration(allow_in=True)
        self.consume_semicolon()
        return node

    def parse_variable_declaration(self, allow_in: bool) -> Node:
        kind = self.advance().value
        declarators = [self.parse_declarator(allow_in)]
        while self.at_punct(","):
            self.advance()
            declarators.append(self.parse_declarator(allow_in))
        return Node("VariableDeclaration", declarators, info=kind)

    def parse_declarator(self, allow_in: bool) -> Node:
        target = self.parse_binding_target()
        children = [target]
        if self.at_punct("="):
            self.advance()
            children.append(self.parse_assignment(allow_in))
        return Node("VariableDeclarator", children)

    def parse_binding_target(self) -> Node:
        if self.at_punct("["):
            return self.parse_array_pattern()
        if self.at_punct("{"):
            return self.parse_object_pattern()
        return Node("Identifier", info=self.ident_name())

    def parse_array_pattern(self) -> Node:
        self.expect_punct("[")
        elements = []
        while not self.at_punct("]"):
            if self.at_punct(","):
                self.advance()
                continue
            if self.at_punct("..."):
                self.advance()
                elements.append(Node("RestElement", [self.parse_binding_target()]))
            else:
                elements.append(self.parse_binding_element())
            if self.at_punct(","):
                self.advance()
        self.expect_punct("]")
        return Node("ArrayPattern", elements)

    def parse_object_pattern(self) -> Node:
        self.expect_punct("{")
        props = []
        while not self.at_punct("}"):
            if self.at_punct("..."):
                self.advance()
                props.append(Node("RestElement", [self.parse_binding_target()]))
            else:
                key = self.parse_property_key()
                if self.at_punct(":"):
                    self.advance()
                    props.append(Node("Property", [key, self.parse_binding_element()]))
                else:
                    value: Node = Node("Identifier", info=key.info)
                    if self.at_punct("="):
                        self.advance()
                        value = Node("AssignmentPattern", [value, self.parse_assignment(True)])
                    props.append(Node("Property", [key, value]))
            if self.at_punct(","):
                self.advance()
        self.expect_punct("}")
        return Node("ObjectPattern", props)

    def parse_binding_element(self) -> Node:
        target = self.parse_binding_target()
        if self.at_punct("="):
            self.advance()
            return Node("AssignmentPattern", [target, self.parse_assignment(True)])
        return target

    def parse_function(self, declaration: bool) -> Node:
        self.expect_keyword("function")
        if self.at_punct("*"):
            self.advance()
        children = []
        if self.tok.type == "ident":
            children.append(Node("Identifier", info=self.ident_name()))
        elif declaration:
            raise self.error("function declarations need a name")
        children.extend(self.parse_params())
        children.append(self.parse_block())
        return Node("FunctionDeclaration" if declaration else "FunctionExpression", children)

    def parse_params(self) -> list[Node]:
        self.expect_punct("(")
        params = []
        while not self.at_punct(")"):
            if self.at_punct("..."):
                self.advance()
                params.append(Node("RestElement", [self.parse_binding_target()]))
            else:
                params.append(self.parse_binding_element())
            if self.at_punct(","):
                self.advance()
        self.expect_punct(")")
        return params

    def parse_if(self) -> Node:
        self.expect_keyword("if")
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        consequent = self.parse_statement()
        children = [test, consequent]
        if self.at_keyword("else"):
            self.advance()
            children.append(self.parse_statement())
        return Node("IfStatement", children)

    def parse_for(self) -> Node:
        self.expect_keyword("for")
        self.expect_punct("(")
        init: Node | None = None
        if self.at_keyword("var", "let", "const"):
            init = self.parse_variable_declaration(allow_in=False)
        elif not self.at_punct(";"):
            init = self.parse_expression(allow_in=False)

        if init is not None and (self.at_keyword("in") or (self.tok.type == "ident" and self.tok.value == "of")):
            kind = "ForInStatement" if self.tok.value == "in" else "ForOfStatement"
            self.advance()
            right = self.parse_assignment(True) if kind == "ForOfStatement" else self.parse_expression()
            self.expect_punct(")")
            return Node(kind, [init, right, self.parse_statement()])

        self.expect_punct(";")
        children = [init or Node("EmptyStatement")]
        children.append(self.parse_expression() if not self.at_punct(";") else Node("EmptyStatement"))
        self.expect_punct(";")
        children.append(self.parse_expression() if not self.at_punct(")") else Node("EmptyStatement"))
        self.expect_punct(")")
        children.append(self.parse_statement())
        return Node("ForStatement", children)

    def parse_while(self) -> Node:
        self.expect_keyword("while")
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        return Node("WhileStatement", [test, self.parse_statement()])

    def parse_do_while(self) -> Node:
        self.expect_keyword("do")
        body = self.parse_statement()
        self.expect_keyword("while")
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        if self.at_punct(";"):
            self.advance()
        return Node("DoWhileStatement", [body, test])

    def parse_return(self) -> Node:
        self.expect_keyword("return")
        children = []
        if not (
            self.at_punct(";")
            or self.at_punct("}")
            or self.tok.type == "eof"
            or self.tok.newline_before
        ):
            children.append(self.parse_expression())
        self.consume_semicolon()
        return Node("ReturnStatement", children)

    def parse_break_continue(self, type_: str) -> Node:
        self.advance()
        children = []
        if self.tok.type == "ident" and not self.tok.newline_before:
            children.append(Node("Identifier", info=self.ident_name()))
        self.consume_semicolon()
        return Node(type_, children)

    def parse_throw(self) -> Node:
        self.expect_keyword("throw")
        if self.tok.newline_before:
            raise self.error("newline after throw")
        argument = self.parse_expression()
        self.consume_semicolon()
        return Node("ThrowStatement", [argument])

    def parse_try(self) -> Node:
        self.expect_keyword("try")
        children = [self.parse_block()]
        if self.at_keyword("catch"):
            self.advance()
            handler_children = []
            if self.at_punct("("):
                self.advance()
                handler_children.append(self.parse_binding_target())
                self.expect_punct(")")
            handler_children.append(self.parse_block())
            children.append(Node("CatchClause", handler_children))
        if self.at_keyword("finally"):
            self.advance()
            children.append(self.parse_block())
        if len(children) == 1:
            raise self.error("try needs catch or finally")
        return Node("TryStatement", children)

    def parse_switch(self) -> Node:
        self.expect_keyword("switch")
        self.expect_punct("(")
        discriminant = self.parse_expression()
        self.expect_punct(")")
        self.expect_punct("{")
        cases = []
        while not self.at_punct("}"):
            case_children = []
            if self.at_keyword("case"):
                self.advance()
                case_children.append(self.parse_expression())
            else:
                self.expect_keyword("default")
            self.expect_punct(":")
            while not (self.at_keyword("case", "default") or self.at_punct("}")):
                case_children.append(self.parse_statement())
            cases.append(Node("SwitchCase", case_children))
        self.advance()
        return Node("SwitchStatement", [discriminant] + cases)

    def parse_with(self) -> Node:
        self.expect_keyword("with")
        self.expect_punct("(")
        obj = self.parse_expression()
        self.expect_punct(")")
        return Node("WithStatement", [obj, self.parse_statement()])

    def parse_debugger(self) -> Node:
        self.advance()
        self.consume_semicolon()
        return Node("DebuggerStatement")

    def parse_class(self, declaration: bool) -> Node:
        self.expect_keyword("class")
        children = []
        if self.tok.type == "ident":
            children.append(Node("Identifier", info=self.ident_name()))
        elif declaration:
            raise self.error("class declarations need a name")
        if self.at_keyword("extends"):
            self.advance()
            children.append(self.parse_unary())
        children.append(self.parse_class_body())
        return Node("ClassDeclaration" if declaration else "ClassExpression", children)

    def parse_class_body(self) -> Node:
        self.expect_punct("{")
        members = []
        while not self.at_punct("}"):
            if self.at_punct(";"):
                self.advance()
                continue
            if self.tok.type == "ident" and self.tok.value == "static":
                nxt = self.peek()
                if not (nxt.type == "punct" and nxt.value in ("(", "=")):
                    self.advance()
            if (
                self.tok.type == "ident"
                and self.tok.value in ("get", "set")
                and not (self.peek().type == "punct" and self.peek().value in ("(", "=", ";", "}"))
            ):
                self.advance()
            if self.at_punct("*"):
                self.advance()
            key = self.parse_property_key()
            if self.at_punct("("):
                fn = Node("FunctionExpression", self.parse_params() + [self.parse_block()])
                members.append(Node("MethodDefinition", [key, fn]))
            else:
                children = [key]
                if self.at_punct("="):
                    self.advance()
                    children.append(self.parse_assignment(True))
                self.consume_semicolon()
                members.append(Node("PropertyDefinition", children))
        self.advance()
        return Node("ClassBody", members)

    def parse_property_key(self) -> Node:
        if self.at_punct("["):
            self.advance()
            key = self.parse_assignment(True)
            self.expect_punct("]")
            return key
        if self.tok.type in ("str", "num"):
            return Node("Literal", info=self.advance().value)
        if self.tok.type == "punct" and self.tok.value == "#":
            raise self.error("unsupported private name syntax")
        if self.tok.type in ("ident", "keyword"):
            return Node("Identifier", info=self.advance().value)
        raise self.error(f"bad property key {self.tok.value!r}")

    def parse_import(self) -> Node:
        self.expect_keyword("import")
        if self.at_punct("("):  # dynamic import as expression statement
            call = self.finish_call_chain(Node("ImportExpression", [self.parse_import_argument()]))
            expr = self.parse_expression_rest(call)
            self.consume_semicolon()
            return Node("ExpressionStatement", [expr])
        if self.at_punct("."):
            self.advance()
            self.ident_name()
            expr = self.parse_expression_rest(self.finish_call_chain(Node("MetaProperty")))
            self.consume_semicolon()
            return Node("ExpressionStatement", [expr])
        specifiers = []
        if self.tok.type == "str":
            source = Node("Literal", info=self.advance().value)
            self.consume_semicolon()
            return Node("ImportDeclaration", [source])
        if self.tok.type == "ident":
            specifiers.append(Node("ImportDefaultSpecifier", [Node("Identifier", info=self.ident_name())]))
            if self.at_punct(","):
                self.advance()
        if self.at_punct("*"):
            self.advance()
            self._expect_contextual("as")
            specifiers.append(Node("ImportNamespaceSpecifier", [Node("Identifier", info=self.ident_name())]))
        elif self.at_punct("{"):
            self.advance()
            while not self.at_punct("}"):
                imported = Node("Identifier", info=self.advance().value)
                children = [imported]
                if self.tok.type == "ident" and self.tok.value == "as":
                    self.advance()
                    children.append(Node("Identifier", info=self.ident_name()))
                specifiers.append(Node("ImportSpecifier", children))
                if self.at_punct(","):
                    self.advance()
            self.expect_punct("}")
        self._expect_contextual("from")
        source = Node("Literal", info=self.advance().value if self.tok.type == "str" else "")
        self.consume_semicolon()
        return Node("ImportDeclaration", specifiers + [source])

    def _expect_contextual(self, word: str) -> None:
        if not (self.tok.type == "ident" and self.tok.value == word):
            raise self.error(f"expected {word!r}")
        self.advance()

    def parse_import_argument(self) -> Node:
        self.expect_punct("(")
        arg = self.parse_assignment(True)
        self.expect_punct(")")
        return arg

    def parse_export(self) -> Node:
        self.expect_keyword("export")
        if self.at_punct("*"):
            self.advance()
            self._expect_contextual("from")
            source = Node("Literal", info=self.advance().value if self.tok.type == "str" else "")
            self.consume_semicolon()
            return Node("ExportAllDeclaration", [source])
        if self.at_keyword("default"):
            self.advance()
            if self.at_keyword("function"):
                return Node("ExportDefaultDeclaration", [self.parse_function(declaration=False)])
            if self.at_keyword("class"):
                return Node("ExportDefaultDeclaration", [self.parse_class(declaration=False)])
            expr = self.parse_assignment(True)
            self.consume_semicolon()
            return Node("ExportDefaultDeclaration", [expr])
        if self.at_punct("{"):
            self.advance()
            specifiers = []
            while not self.at_punct("}"):
                local = Node("Identifier", info=self.advance().value)
                children = [local]
                if self.tok.type == "ident" and self.tok.value == "as":
                    self.advance()
                    children.append(Node("Identifier", info=self.advance().value))
                specifiers.append(Node("ExportSpecifier", children))
                if self.at_punct(","):
                    self.advance()
            self.expect_punct("}")
            if self.tok.type == "ident" and self.tok.value == "from":
                self.advance()
                specifiers.append(Node("Literal", info=self.advance().value if self.tok.type == "str" else ""))
            self.consume_semicolon()
            return Node("ExportNamedDeclaration", specifiers)
        if self.at_keyword("var", "let", "const"):
            return Node("ExportNamedDeclaration", [self.parse_variable_statement()])
        if self.at_keyword("function"):
            return Node("ExportNamedDeclaration", [self.parse_function(declaration=True)])
        if self.at_keyword("class"):
            return Node("ExportNamedDeclaration", [self.parse_class(declaration=True)])
        raise self.error("unsupported export form")

    # -- expressions ---------------------------------------------------------

    def parse_expression(self, allow_in: bool = True) -> Node:
        expr = self.parse_assignment(allow_in)
        if not self.at_punct(","):
            return expr
        exprs = [expr]
        while self.at_punct(","):
            self.advance()
            exprs.append(self.parse_assignment(allow_in))
        return Node("SequenceExpression", exprs)

    def parse_expression_rest(self, left: Node, allow_in: bool = True) -> Node:
        """Continue binary/conditional/assignment parsing after a primary."""
        expr = self.parse_binary_rest(left, 0, allow_in)
        expr = self.parse_conditional_rest(expr, allow_in)
        return self.parse_assignment_rest(expr, allow_in)

    def parse_assignment(self, allow_in: bool = True) -> Node:
        if self.at_keyword("yield"):
            return self.parse_yield(allow_in)
        if (
            self.tok.type == "ident"
            and self.peek().type == "punct"
            and self.peek().value == "=>"
        ):
            param = Node("Identifier", info=self.ident_name())
            return self.parse_arrow_body([param])
        expr = self.parse_conditional(allow_in)
        return self.parse_assignment_rest(expr, allow_in)

    def parse_assignment_rest(self, expr: Node, allow_in: bool) -> Node:
        if self.tok.type == "punct" and self.tok.value in _ASSIGN_OPS:
            op = self.advance().value
            target = _to_pattern(expr, self) if op == "=" else expr
            right = self.parse_assignment(allow_in)
            return Node("AssignmentExpression", [target, right], info=op)
        return expr

    def parse_yield(self, allow_in: bool) -> Node:
        self.expect_keyword("yield")
        children = []
        if self.at_punct("*"):
            self.advance()
        if not self.tok.newline_before and not (
            self.at_punct(")", "]", "}", ",", ";", ":") or self.tok.type == "eof"
        ):
            children.append(self.parse_assignment(allow_in))
        return Node("YieldExpression", children)

    def parse_conditional(self, allow_in: bool) -> Node:
        expr = self.parse_binary(0, allow_in)
        return self.parse_conditional_rest(expr, allow_in)

    def parse_conditional_rest(self, expr: Node, allow_in: bool) -> Node:
        if self.at_punct("?"):
            self.advance()
            consequent = self.parse_assignment(True)
            self.expect_punct(":")
            alternate = self.parse_assignment(allow_in)
            return Node("ConditionalExpression", [expr, consequent, alternate])
        return expr

    def _binary_op(self, allow_in: bool) -> str | None:
        if self.tok.type == "punct" and self.tok.value in _BINARY_PRECEDENCE:
            return self.tok.value
        if self.at_keyword("instanceof"):
            return "instanceof"
        if self.at_keyword("in") and allow_in:
            return "in"
        return None

    def parse_binary(self, min_prec: int, allow_in: bool) -> Node:
        left = self.parse_unary()
        return self.parse_binary_rest(left, min_prec, allow_in)

    def parse_binary_rest(self, left: Node, min_prec: int, allow_in: bool) -> Node:
        while True:
            op = self._binary_op(allow_in)
            if op is None:
                return left
            prec = _BINARY_PRECEDENCE[op]
            if prec < min_prec:
                return left
            self.advance()
            next_min = prec if op == "**" else prec + 1
            right = self.parse_binary(next_min, allow_in)
            kind = "LogicalExpression" if op in _LOGICAL_OPS else "BinaryExpression"
            left = Node(kind, [left, right], info=op)

    def parse_unary(self) -> Node:
        if self.at_keyword("delete", "void", "typeof"):
            op = self.advance().value
            return Node("UnaryExpression", [self.parse_unary()], info=op)
        if self.at_punct("!", "~", "+", "-"):
            op = self.advance().value
            return Node("UnaryExpression", [self.parse_unary()], info=op)
        if self.at_punct("++", "--"):
            op = self.advance().value
            return Node("UpdateExpression", [self.parse_unary()], info=op)
        if self.at_keyword("await"):
            self.advance()
            return Node("AwaitExpression", [self.parse_unary()])
        expr = self.parse_postfix()
        return expr

    def parse_postfix(self) -> Node:
        expr = self.parse_left_hand_side()
        if self.at_punct("++", "--") and not self.tok.newline_before:
            op = self.advance().value
            return Node("UpdateExpression", [expr], info=op)
        return expr

    def parse_left_hand_side(self) -> Node:
        if self.at_keyword("new"):
            return self.finish_call_chain(self.parse_new())
        return self.finish_call_chain(self.parse_primary())

    def parse_new(self) -> Node:
        self.expect_keyword("new")
        if self.at_punct("."):  # new.target
            self.advance()
            self.ident_name()
            return Node("MetaProperty")
        callee = self.parse_new() if self.at_keyword("new") else self.parse_member_only(self.parse_primary())
        args = self.parse_arguments() if self.at_punct("(") else []
        return Node("NewExpression", [callee] + args)

    def parse_member_only(self, expr: Node) -> Node:
        """Member accesses but no call arguments (callee of `new`)."""
        while True:
            if self.at_punct("."):
                self.advance()
                prop = Node("Identifier", info=self.advance().value)
                expr = Node("MemberExpression", [expr, prop])
            elif self.at_punct("["):
                self.advance()
                prop = self.parse_expression()
                self.expect_punct("]")
                expr = Node("MemberExpression", [expr, prop])
            else:
                return expr

    def parse_arguments(self) -> list[Node]:
        self.expect_punct("(")
        args = []
        while not self.at_punct(")"):
            if self.at_punct("..."):
                self.advance()
                args.append(Node("SpreadElement", [self.parse_assignment(True)]))
            else:
                args.append(self.parse_assignment(True))
            if self.at_punct(","):
                self.advance()
        self.expect_punct(")")
        return args

    def finish_call_chain(self, expr: Node) -> Node:
        optional_seen = False
        while True:
            if self.at_punct("."):
                self.advance()
                if self.tok.type not in ("ident", "keyword"):
                    raise self.error("expected property name")
                prop = Node("Identifier", info=self.advance().value)
                expr = Node("MemberExpression", [expr, prop])
            elif self.at_punct("?."):
                self.advance()
                optional_seen = True
                if self.at_punct("("):
                    expr = Node("CallExpression", [expr] + self.parse_arguments())
                elif self.at_punct("["):
                    self.advance()
                    prop = self.parse_expression()
                    self.expect_punct("]")
                    expr = Node("MemberExpression", [expr, prop])
                else:
                    prop = Node("Identifier", info=self.advance().value)
                    expr = Node("MemberExpression", [expr, prop])
            elif self.at_punct("["):
                self.advance()
                prop = self.parse_expression()
                self.expect_punct("]")
                expr = Node("MemberExpression", [expr, prop])
            elif self.at_punct("("):
                expr = Node("CallExpression", [expr] + self.parse_arguments())
            elif self.tok.type in ("template_full", "template_head"):
                expr = Node("TaggedTemplateExpression", [expr, self.parse_template()])
            else:
                break
        if optional_seen:
            expr = Node("ChainExpression", [expr])
        return expr

    def parse_template(self) -> Node:
        children: list[Node] = []
        tok = self.advance()
        if tok.type == "template_full":
            return Node("TemplateLiteral", [Node("TemplateElement", info=tok.value)])
        children.append(Node("TemplateElement", info=tok.value))
        while True:
            children.append(self.parse_expression())
            if self.tok.type == "template_middle":
                children.append(Node("TemplateElement", info=self.tok.value))
                self.advance()
            elif self.tok.type == "template_tail":
                children.append(Node("TemplateElement", info=self.tok.value))
                self.advance()
                return Node("TemplateLiteral", children)
            else:
                raise self.error("unterminated template substitution")

    def parse_primary(self) -> Node:
        tok = self.tok
        if tok.type == "num" or tok.type == "str" or tok.type == "regex":
            self.advance()
            return Node("Literal", info=tok.value)
        if tok.type in ("template_full", "template_head"):
            return self.parse_template()
        if tok.type == "keyword":
            if tok.value == "this":
                self.advance()
                return Node("ThisExpression")
            if tok.value in ("true", "false", "null"):
                self.advance()
                return Node("Literal", info=tok.value)
            if tok.value == "function":
                return self.parse_function(declaration=False)
            if tok.value == "class":
                return self.parse_class(declaration=False)
            if tok.value == "super":
                self.advance()
                return Node("Super")
            if tok.value == "new":
                return self.parse_new()
            if tok.value == "import":
                self.advance()
                if self.at_punct("("):
                    return Node("ImportExpression", [self.parse_import_argument()])
                if self.at_punct("."):
                    self.advance()
                    self.ident_name()
                    return Node("MetaProperty")
                raise self.error("unexpected 'import' in expression")
            raise self.error(f"unexpected keyword {tok.value!r}")
        if tok.type == "ident":
            if tok.value == "async":
                nxt = self.peek()
                if nxt.type == "keyword" and nxt.value == "function" and not nxt.newline_before:
                    self.advance()
                    return self.parse_function(declaration=False)
                if nxt.type == "ident" and not nxt.newline_before:
                    self.advance()
                    param = Node("Identifier", info=self.ident_name())
                    return self.parse_arrow_body([param])
            self.advance()
            return Node("Identifier", info=tok.value)
        if tok.type == "punct":
            if tok.value == "(":
                return self.parse_paren_or_arrow()
            if tok.value == "[":
                return self.parse_array_literal()
            if tok.value == "{":
                return self.parse_object_literal()
        raise self.error(f"unexpected token {tok.value!r}")

    def parse_paren_or_arrow(self) -> Node:
        self.expect_punct("(")
        if self.at_punct(")"):
            self.advance()
            self.expect_punct("=>")
            return self.parse_arrow_body([], consumed_arrow=True)
        items: list[Node] = []
        saw_rest = False
        while True:
            if self.at_punct("..."):
                self.advance()
                items.append(Node("RestElement", [self.parse_binding_target()]))
                saw_rest = True
            else:
                items.append(self.parse_assignment(True))
            if self.at_punct(","):
                self.advance()
                if self.at_punct(")"):
                    break
                continue
            break
        self.expect_punct(")")
        if self.at_punct("=>"):
            params = [_to_pattern(item, self) for item in items]
            return self.parse_arrow_body(params)
        if saw_rest:
            raise self.error("rest element outside arrow parameters")
        if len(items) == 1:
            return items[0]
        return Node("SequenceExpression", items)

    def parse_arrow_body(self, params: list[Node], consumed_arrow: bool = False) -> Node:
        if not consumed_arrow:
            self.expect_punct("=>")
        if self.at_punct("{"):
            body = self.parse_block()
        else:
            body = self.parse_assignment(True)
        return Node("ArrowFunctionExpression", params + [body])

    def parse_array_literal(self) -> Node:
        self.expect_punct("[")
        elements = []
        while not self.at_punct("]"):
            if self.at_punct(","):
                self.advance()  # elision
                continue
            if self.at_punct("..."):
                self.advance()
                elements.append(Node("SpreadElement", [self.parse_assignment(True)]))
            else:
                elements.append(self.parse_assignment(True))
            if self.at_punct(","):
                self.advance()
        self.expect_punct("]")
        return Node("ArrayExpression", elements)

    def parse_object_literal(self) -> Node:
        self.expect_punct("{")
        props = []
        while not self.at_punct("}"):
            if self.at_punct("..."):
                self.advance()
                props.append(Node("SpreadElement", [self.parse_assignment(True)]))
            else:
                props.append(self.parse_object_property())
            if self.at_punct(","):
                self.advance()
            elif not self.at_punct("}"):
                raise self.error("expected ',' or '}' in object literal")
        self.expect_punct("}")
        return Node("ObjectExpression", props)

    def parse_object_property(self) -> Node:
        if (
            self.tok.type == "ident"
            and self.tok.value in ("get", "set")
            and not (self.peek().type == "punct" and self.peek().value in (":", ",", "}", "("))
        ):
            self.advance()
            key = self.parse_property_key()
            fn = Node("FunctionExpression", self.parse_params() + [self.parse_block()])
            return Node("Property", [key, fn])
        if self.at_punct("*"):
            self.advance()
            key = self.parse_property_key()
            fn = Node("FunctionExpression", self.parse_params() + [self.parse_block()])
            return Node("Property", [key, fn])
        key = self.parse_property_key()
        if self.at_punct(":"):
            self.advance()
            return Node("Property", [key, self.parse_assignment(True)])
        if self.at_punct("("):
            fn = Node("FunctionExpression", self.parse_params() + [self.parse_block()])
            return Node("Property", [key, fn])
        if self.at_punct("="):  # only valid under pattern reinterpretation
            self.advance()
            value = Node("AssignmentPattern", [Node("Identifier", info=key.info), self.parse_assignment(True)])
            return Node("Property", [key, value])
        return Node("Property", [key, Node("Identifier", info=key.info)])


def _to_pattern(node: Node, parser: _Parser) -> Node:
    """Reinterpret an expression as a binding pattern (arrow params, lhs)."""
    if node.type in (
        "Identifier",
        "MemberExpression",
        "ObjectPattern",
        "ArrayPattern",
        "AssignmentPattern",
        "RestElement",
        "ChainExpression",
    ):
        return node
    if node.type == "ObjectExpression":
        return Node(
            "ObjectPattern",
            [_to_pattern(p, parser) for p in node.children],
            info=node.info,
        )
    if node.type == "Property":
        key, value = node.children
        return Node("Property", [key, _to_pattern(value, parser)], info=node.info)
    if node.type == "ArrayExpression":
        return Node("ArrayPattern", [_to_pattern(c, parser) for c in node.children], info=node.info)
    if node.type == "SpreadElement":
        return Node("RestElement", [_to_pattern(node.children[0], parser)])
    if node.type == "AssignmentExpression" and node.info == "=":
        left, right = node.children
        return Node("AssignmentPattern", [_to_pattern(left, parser), right])
    raise parser.error(f"cannot use {node.type} as an assignment target")


def parse_program(source: str) -> Node:
    """Parse script source to a structure-only tree; JsParseError on failure."""
    parser = _Parser(source)
    return parser.parse_program()

import re

_TOKEN = re.compile(
    r'''"(?:[^"\\\n]|\\.)*"'''     # double-quoted literal
    r"""|'(?:[^'\\\n]|\\.)*'"""     # single-quoted literal
    r"|\d+(?:\.\d+)?"               # number
    r"|[^\W\d]\w*"                  # identifier
    r"|\S",                         # any other single character
)


def tokenize_code(text: str) -> list[str]:
    """Split code into identifiers, numbers, string literals and single
    punctuation/operator characters. Case is preserved."""
    return _TOKEN.findall(text)


FIELD_SEPARATOR = " <CODEEND> "


def join_field(x) -> str:
    """Join a snippet sequence into one text; strings pass through."""
    if isinstance(x, str):
        return x
    return FIELD_SEPARATOR.join(x)

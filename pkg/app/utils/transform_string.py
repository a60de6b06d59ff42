import logging

logger = logging.getLogger(__name__)

# Forbidden characters for Windows and macOS filenames, plus the separators of generator specs
FORBIDDEN_CHARS = ['\\', '/', ':', '*', '?', '"', '<', '>', '|', '\0', '-', ',', '=']


def transform_string(input_string: str) -> str:
    """
    Turn a label such as "vinh q3 seed7 points" into a filename slug:
    1. Removing forbidden filename characters.
    2. Replacing runs of whitespace with a single underscore.
    3. Removing consecutive underscores.
    4. Converting the string to lowercase.

    Args:
        input_string (str): The string to be transformed.

    Returns:
        str: The transformed string, or "" for non-string input.
    """
    if not isinstance(input_string, str):
        logger.warning("transform_string expects a string, got %s", type(input_string).__name__)
        return ""

    for char in FORBIDDEN_CHARS:
        input_string = input_string.replace(char, '')

    input_string = '_'.join(input_string.split())

    while '__' in input_string:
        input_string = input_string.replace('__', '_')

    return input_string.casefold()

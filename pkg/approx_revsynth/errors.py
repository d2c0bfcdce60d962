from approx_revsynth.color_printer import print_red, print_yellow


class Error(Exception):
    error_messages = []

    def __init__(self, message, source=None, is_critical=True):
        super().__init__(message)
        if is_critical:
            print_red(f"{type(self).__name__}: {message}")
        if source is not None:
            self.store_error(source, message)

    @classmethod
    def store_error(cls, source, message):
        cls.error_messages.append({source: str(message)})


class NonCriticalError(Error):
    error_messages = []

    def __init__(self, message, source=None, calling_function=None):
        if calling_function is not None:
            message = f"{calling_function} failed: {message}"
        print_yellow(f"NonCriticalError: {message}")
        super().__init__(message, source, is_critical=False)


# Violated pre-condition of a circuit operation (bad index, width mismatch)
class CircuitError(Error):
    pass


class ParseError(Error):
    def __init__(self, message, line_number=None, source=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message, source)


class RestrictionError(Error):
    pass


class ResourceError(Error):
    pass


class ConfigError(Error):
    pass

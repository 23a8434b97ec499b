"""Jerarquía de excepciones del paquete."""


class CurvlabError(Exception):
    """Error base de curvlab."""


class DomainError(CurvlabError, ValueError):
    """Se violó una precondición (argumento fuera de dominio)."""


class NumericError(CurvlabError, ArithmeticError):
    """Falla numérica: no convergencia, sistema singular o desbordamiento."""

    def __init__(self, message, point=None, residual=None):
        super().__init__(message)
        self.point = point
        self.residual = residual


class ConfigError(CurvlabError):
    """Configuración de corrida inválida; `problems` lista cada campo inválido."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__('; '.join(self.problems))

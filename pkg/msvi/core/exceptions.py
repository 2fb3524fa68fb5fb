from __future__ import annotations

from typing import Any


class MsviError(Exception):
    """Raíz de los errores propios del paquete."""


class ShapeError(MsviError, ValueError):
    """Dimensiones, espacios muestrales o bloques incompatibles."""


class StructureError(MsviError, ValueError):
    """Particiones que no cubren los átomos o que vienen de otro espacio."""


class ConfigError(MsviError, ValueError):
    """Configuración de corrida inválida (código de salida 2)."""


class ProblemFileError(MsviError, ValueError):
    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{message} (campo: {field})"
        super().__init__(message)


class ProblemValidationError(MsviError, ValueError):
    """Archivo bien formado cuyo contenido viola un invariante del dominio."""


class InnerSolveError(MsviError):
    def __init__(self, atom: int | None, residual: float, iterations: int):
        self.atom = atom
        self.residual = residual
        self.iterations = iterations
        where = f"átomo {atom}" if atom is not None else "subproblema"
        message = (
            f"VI puntual sin converger en {where} "
            f"(iter={iterations}, residuo={residual:.3e})"
        )
        super().__init__(message)


class TheoryViolation(MsviError, AssertionError):
    def __init__(self, inequality: str, iteration: int, lhs: float, rhs: float, detail: Any = None):
        self.inequality = inequality
        self.iteration = iteration
        self.lhs = lhs
        self.rhs = rhs
        self.detail = detail
        message = (
            f"Se viola '{inequality}' en la iteración {iteration}: "
            f"lhs={lhs:.6e} rhs={rhs:.6e}"
        )
        if detail:
            message = f"{message} | {detail}"
        super().__init__(message)

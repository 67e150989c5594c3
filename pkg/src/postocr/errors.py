"""Exception hierarchy shared by every module of the package."""


class PostOCRError(Exception):
    """Base class for all package errors."""


class ParseError(PostOCRError):
    pass


class MissingTag(ParseError):
    def __init__(self, tag: str):
        super().__init__(f"missing tagged line [{tag}]")
        self.tag = tag


class LengthMismatch(ParseError):
    def __init__(self, ocr_len: int, gs_len: int):
        super().__init__(
            f"aligned lines differ in length: OCR_aligned={ocr_len}, GS_aligned={gs_len}"
        )
        self.ocr_len = ocr_len
        self.gs_len = gs_len


class TooFewDocuments(PostOCRError):
    pass


class EmptyTraining(PostOCRError):
    pass


class EmptyInput(PostOCRError):
    pass


class DomainError(PostOCRError, ValueError):
    pass


class NoCoverage(PostOCRError):
    def __init__(self, position: int):
        super().__init__(f"source position {position} is covered by no window")
        self.position = position


class WindowFailure(PostOCRError):
    """A corrector raised while processing the window starting at ``offset``."""

    def __init__(self, offset: int, cause: BaseException):
        super().__init__(f"correction failed for window at offset {offset}: {cause}")
        self.offset = offset


class ModelFileError(PostOCRError):
    pass


class VersionMismatch(ModelFileError):
    pass


class CorruptFile(ModelFileError):
    pass

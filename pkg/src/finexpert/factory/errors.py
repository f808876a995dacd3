"""Factory pipeline errors (teacher errors live in teacher.py)."""


class EmptyInput(Exception):
    pass


class EmptyKnowledgeBase(Exception):
    pass


class ValidationFailed(Exception):
    pass


class InsufficientSamplesForFewShot(Exception):
    pass

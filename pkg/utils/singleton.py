import functools


def singleton(cls):
    """
    Decorator to implement the Singleton design pattern.
    Ensures only one instance of the decorated class exists.

    The getter exposes ``reset()`` so tests can drop the cached instance.

    Args:
        cls: The class to be decorated

    Returns:
        The singleton instance getter
    """
    instances = {}

    @functools.wraps(cls)
    def get_instance(*args, **kwargs):
        if cls not in instances:
            instances[cls] = cls(*args, **kwargs)
        return instances[cls]

    def reset() -> None:
        instances.pop(cls, None)

    get_instance.reset = reset
    get_instance.wrapped_class = cls
    return get_instance

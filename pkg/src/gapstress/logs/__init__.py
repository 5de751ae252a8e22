import logging, time, sys


class LogFormatter(logging.Formatter):
    """
    Represents a coloured log formatter.

    Args:
        name (str): Fixed label printed in front of every record. When omitted the label is
            derived from the last component of the record's logger name, so that
            ``gapstress.quadrature`` prints as ``QUADRATURE``.
    """
    COLOR_CODES = {
        logging.DEBUG: "\033[94m\033[1m",
        logging.INFO: "\033[92m",
        logging.WARNING: "\033[93m\033[1m",
        logging.ERROR: "\033[91m\033[1m",
        logging.CRITICAL: "\033[91m\033[1m\033[4m\033[5m"
    }

    def __init__(self, name=None):
        super().__init__("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        self.name = name

    def label(self, record):
        return self.name or record.name.split(".")[-1].upper()

    def stamp(self, record):
        return time.strftime("%d-%m-%Y@%H:%M:%S", time.localtime(record.created))

    def format(self, record):
        return ("%s[%s] %s:\033[0m %s:: %s" % (self.COLOR_CODES[record.levelno], self.label(record), record.levelname, self.stamp(record), record.getMessage()))


class MonoLogFormatter(LogFormatter):
    """
    Represents a monochrome log formatter, used for log files.
    """
    def format(self, record):
        return ("[%s] %s: %s:: %s" % (self.label(record), record.levelname, self.stamp(record), record.getMessage()))


loggers = {
    "Elasticity": logging.getLogger("gapstress.elasticity"),
    "Geometry": logging.getLogger("gapstress.geometry"),
    "Kernels": logging.getLogger("gapstress.kernels"),
    "Quadrature": logging.getLogger("gapstress.quadrature"),
    "Bounds": logging.getLogger("gapstress.bounds"),
    "Pipeline": logging.getLogger("gapstress.pipeline"),
}


def changestreamhandler(name, streamhandler=None, formatter=None, level=logging.INFO, logfile=None):
    """
    Reconfigures the named logger: old handlers are dropped, the stream handler (if any) gets
    the coloured formatter and an optional log file gets the monochrome one.
    """
    l = logging.getLogger(name)
    if not formatter:
        formatter = LogFormatter()
    if l.hasHandlers():
        l.handlers.clear()
    if streamhandler:
        streamhandler.setFormatter(formatter)
        l.addHandler(streamhandler)
    if logfile:
        file_handler = logging.FileHandler(logfile)
        file_handler.setFormatter(MonoLogFormatter(formatter.name))
        l.addHandler(file_handler)
    l.setLevel(level)
    return l


cli_logger = lambda level=logging.INFO, logfile=None: changestreamhandler("gapstress", logging.StreamHandler(sys.stderr), LogFormatter(), level, logfile)

from colorama import Fore, Style

from approx_revsynth.log import logger


# Colorama presets
def print_yellow(message):
    logger.warning(f'{Fore.LIGHTYELLOW_EX}{message}{Fore.RESET}')


def print_red(message):
    logger.error(f'{Fore.RED}{message}{Fore.RESET}')


def print_green(message):
    logger.info(f'{Fore.GREEN}{message}{Fore.RESET}')


def rate_colour(err):
    # exact: green, no better than a coin flip: yellow
    if err == 0:
        return Fore.GREEN
    if err >= 0.5:
        return Fore.LIGHTYELLOW_EX
    return Fore.CYAN


def print_result(label, err, qc, cc=None):
    cost = f'qc={qc}' if cc is None else f'qc={qc} cc={cc}'
    logger.info(f'{Style.BRIGHT}{label}{Style.RESET_ALL}: '
                f'{rate_colour(err)}err={float(err):.6f}{Fore.RESET} {cost}')

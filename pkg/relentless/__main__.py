"""
__main__: runs the relentless command line interface
Corey Rayburn Yung <coreyrayburnyung@gmail.com>
Copyright 2020-2023, Corey Rayburn Yung
License: Apache-2.0

"""
from .cli import main


if __name__ == '__main__':
    raise SystemExit(main())

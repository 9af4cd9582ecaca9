from glw.cli import main

main()

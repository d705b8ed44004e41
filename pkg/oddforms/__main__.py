from oddforms.main import main

main()

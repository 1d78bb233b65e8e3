int main()
{
  int a = 6, b = 2;

  while(a>0)
  {
    a = a - 1;
  }

  b = a + b;

  return 0;
}
